#pragma once

// Run manifest: config echo, versions, wall time, thread count and SHA-256
// of every input and output file, written as JSON.

#include <openssl/evp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <fftw3.h>
#include <json.hpp>

#include "wemig/error.hpp"

namespace wemig {

inline constexpr const char* kVersion = "0.1.0";

inline std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
        throw Error("sha256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

inline std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for hashing");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

class Manifest {
public:
    explicit Manifest(std::string subcommand) : start_(std::chrono::steady_clock::now()) {
        j_["subcommand"] = std::move(subcommand);
        j_["versions"] = {{"wemig", kVersion}, {"fftw", std::string(fftw_version)}, {"compiler", std::string(__VERSION__)},
                          {"cxx_standard", static_cast<long>(__cplusplus)}};
        j_["inputs"] = nlohmann::json::array();
        j_["outputs"] = nlohmann::json::array();
        j_["results"] = nlohmann::json::object();
    }

    nlohmann::json& json() { return j_; }
    nlohmann::json& results() { return j_["results"]; }

    void set_command_line(const std::vector<std::string>& argv) { j_["argv"] = argv; }
    void set_config(const std::string& path, const std::string& text) {
        j_["config"] = {{"path", path}, {"text", text}, {"sha256", sha256_hex(text)}};
    }
    void set_threads(int n) { j_["threads"] = n; }
    void add_input(const std::string& path) { j_["inputs"].push_back(entry(path)); }
    void add_output(const std::string& path) { j_["outputs"].push_back(entry(path)); }

    /// Stamps the wall time and writes the JSON; returns the written path.
    std::string write(const std::string& dir) {
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        j_["wall_time_s"] = wall;
        const std::string path =
            (std::filesystem::path(dir) / (j_["subcommand"].get<std::string>() + ".manifest.json")).string();
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw IoError("cannot write manifest '" + path + "'");
        out << j_.dump(2) << '\n';
        if (!out) throw IoError("write to '" + path + "' failed");
        return path;
    }

private:
    static nlohmann::json entry(const std::string& path) {
        return {{"path", path}, {"sha256", sha256_file(path)}};
    }

    std::chrono::steady_clock::time_point start_;
    nlohmann::json j_;
};

}  // namespace wemig
