#pragma once

// WEGRID01 binary container.
//
//   magic    8 bytes   "WEGRID01"
//   ndim     u32 LE    1..4
//   per dim  u64 LE n, f64 LE delta, f64 LE origin, 8 bytes label (space padded)
//   dtype    u32 LE    0 = real f64, 1 = complex f64 (re, im interleaved)
//   payload  row-major, last dimension fastest, little-endian f64

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "wemig/array.hpp"

namespace wemig {

inline constexpr char kContainerMagic[8] = {'W', 'E', 'G', 'R', 'I', 'D', '0', '1'};

enum class DType : std::uint32_t { real = 0, complex = 1 };

/// Untyped container contents.
struct Dataset {
    std::vector<Axis> axes;
    DType dtype = DType::real;
    std::vector<double> real;
    std::vector<cplx> complex;

    std::size_t count() const {
        std::size_t c = 1;
        for (const auto& a : axes) c *= a.n;
        return c;
    }
};

namespace detail {

template <class U>
void put_le(std::string& out, U v) {
    static_assert(std::is_unsigned_v<U>);
    for (std::size_t i = 0; i < sizeof(U); ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

inline void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class ByteReader {
public:
    explicit ByteReader(const std::string& buf) : buf_(buf) {}

    template <class U>
    U get_le() {
        need(sizeof(U));
        U v = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i)
            v |= static_cast<U>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        pos_ += sizeof(U);
        return v;
    }
    double get_f64() { return std::bit_cast<double>(get_le<std::uint64_t>()); }
    std::string get_bytes(std::size_t n) {
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return buf_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw LengthError("container truncated in header");
    }
    const std::string& buf_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string padded_label(const std::string& label) {
    std::string s = label.substr(0, 8);
    s.resize(8, ' ');
    return s;
}

}  // namespace detail

/// Serialize to the exact container byte layout.
inline std::string encode_container(const Dataset& ds) {
    if (ds.axes.empty() || ds.axes.size() > 4) throw FormatError("container rank must be 1..4");
    for (const auto& a : ds.axes) a.validate();
    const std::size_t n = ds.count();
    if (ds.dtype == DType::real) {
        if (ds.real.size() != n) throw LengthError("payload size does not match axes");
        for (double v : ds.real)
            if (!std::isfinite(v)) throw DataError("refusing to write non-finite sample");
    } else {
        if (ds.complex.size() != n) throw LengthError("payload size does not match axes");
        for (const auto& v : ds.complex)
            if (!is_finite_sample(v)) throw DataError("refusing to write non-finite sample");
    }

    std::string out(kContainerMagic, 8);
    detail::put_le(out, static_cast<std::uint32_t>(ds.axes.size()));
    for (const auto& a : ds.axes) {
        detail::put_le(out, static_cast<std::uint64_t>(a.n));
        detail::put_f64(out, a.delta);
        detail::put_f64(out, a.origin);
        out += detail::padded_label(a.label);
    }
    detail::put_le(out, static_cast<std::uint32_t>(ds.dtype));
    out.reserve(out.size() + n * (ds.dtype == DType::real ? 8 : 16));
    if (ds.dtype == DType::real) {
        for (double v : ds.real) detail::put_f64(out, v);
    } else {
        for (const auto& v : ds.complex) {
            detail::put_f64(out, v.real());
            detail::put_f64(out, v.imag());
        }
    }
    return out;
}

inline Dataset decode_container(const std::string& bytes) {
    detail::ByteReader rd(bytes);
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kContainerMagic, 8) != 0)
        throw FormatError("bad magic: not a WEGRID01 container");
    rd.get_bytes(8);
    const auto ndim = rd.get_le<std::uint32_t>();
    if (ndim < 1 || ndim > 4) throw FormatError("unsupported rank " + std::to_string(ndim));
    Dataset ds;
    for (std::uint32_t d = 0; d < ndim; ++d) {
        Axis a;
        a.n = static_cast<std::size_t>(rd.get_le<std::uint64_t>());
        a.delta = rd.get_f64();
        a.origin = rd.get_f64();
        std::string label = rd.get_bytes(8);
        while (!label.empty() && (label.back() == ' ' || label.back() == '\0')) label.pop_back();
        a.label = label;
        try {
            a.validate();
        } catch (const ContractError& e) {
            throw FormatError(std::string("invalid axis in header: ") + e.what());
        }
        ds.axes.push_back(a);
    }
    const auto dtype = rd.get_le<std::uint32_t>();
    if (dtype > 1) throw FormatError("unknown dtype " + std::to_string(dtype));
    ds.dtype = static_cast<DType>(dtype);

    const std::size_t n = ds.count();
    const std::size_t width = ds.dtype == DType::real ? 8 : 16;
    if (rd.remaining() != n * width)
        throw LengthError("payload has " + std::to_string(rd.remaining()) + " bytes, expected " +
                          std::to_string(n * width));
    if (ds.dtype == DType::real) {
        ds.real.resize(n);
        for (auto& v : ds.real) {
            v = rd.get_f64();
            if (!std::isfinite(v)) throw DataError("container holds a non-finite sample");
        }
    } else {
        ds.complex.resize(n);
        for (auto& v : ds.complex) {
            const double re = rd.get_f64();
            const double im = rd.get_f64();
            v = {re, im};
            if (!is_finite_sample(v)) throw DataError("container holds a non-finite sample");
        }
    }
    return ds;
}

inline void write_bytes(const std::string& bytes, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write to '" + path + "' failed");
}

inline Dataset read_container(const std::string& path) { return decode_container(detail::read_file(path)); }

inline void write_container(const Dataset& ds, const std::string& path) {
    write_bytes(encode_container(ds), path);
}

template <class T, std::size_t N>
Dataset to_dataset(const NdArray<T, N>& a) {
    Dataset ds;
    ds.axes.assign(a.axes().begin(), a.axes().end());
    if constexpr (std::is_same_v<T, cplx>) {
        ds.dtype = DType::complex;
        ds.complex = a.storage();
    } else {
        ds.dtype = DType::real;
        ds.real = a.storage();
    }
    return ds;
}

template <class T, std::size_t N>
NdArray<T, N> from_dataset(const Dataset& ds) {
    if (ds.axes.size() != N)
        throw FormatError("expected rank " + std::to_string(N) + ", container has rank " +
                          std::to_string(ds.axes.size()));
    std::array<Axis, N> axes;
    for (std::size_t d = 0; d < N; ++d) axes[d] = ds.axes[d];
    if constexpr (std::is_same_v<T, cplx>) {
        if (ds.dtype != DType::complex) throw FormatError("expected complex payload");
        return NdArray<T, N>(axes, ds.complex);
    } else {
        if (ds.dtype != DType::real) throw FormatError("expected real payload");
        return NdArray<T, N>(axes, ds.real);
    }
}

template <class T, std::size_t N>
void write_container(const NdArray<T, N>& a, const std::string& path) {
    write_container(to_dataset(a), path);
}

inline Grid2D read_grid(const std::string& path) { return from_dataset<double, 2>(read_container(path)); }

inline DataCube read_cube(const std::string& path) {
    auto cube = from_dataset<double, 3>(read_container(path));
    if (cube.axis(0).label != "s" || cube.axis(1).label != "r" || cube.axis(2).label != "t")
        throw FormatError("data cube axes must be labeled s, r, t");
    if (cube.axis(2).origin != 0.0) throw FormatError("data cube time origin must be 0");
    return cube;
}

/// Plot-ready CSV: one sample per line, "coord1,coord2,...,value" (complex
/// samples emit "re,im"). 17 significant digits.
inline std::string dataset_to_csv(const Dataset& ds) {
    std::ostringstream os;
    os << std::setprecision(17);
    const std::size_t n = ds.count();
    std::vector<std::size_t> idx(ds.axes.size(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t d = 0; d < ds.axes.size(); ++d) os << ds.axes[d].coord(idx[d]) << ',';
        if (ds.dtype == DType::real) {
            os << ds.real[k] << '\n';
        } else {
            os << ds.complex[k].real() << ',' << ds.complex[k].imag() << '\n';
        }
        for (std::size_t d = ds.axes.size(); d-- > 0;) {
            if (++idx[d] < ds.axes[d].n) break;
            idx[d] = 0;
        }
    }
    return os.str();
}

/// Fix the listed dimensions at the given indices; the remaining axes keep
/// their order.
inline Dataset slice_dataset(const Dataset& ds, const std::vector<std::pair<std::size_t, std::size_t>>& fixed) {
    const std::size_t rank = ds.axes.size();
    std::vector<long long> fix(rank, -1);
    for (const auto& [d, i] : fixed) {
        if (d >= rank) throw RangeError("slice: dimension " + std::to_string(d) + " out of range");
        if (i >= ds.axes[d].n)
            throw RangeError("slice: index " + std::to_string(i) + " out of range for axis '" + ds.axes[d].label + "'");
        if (fix[d] >= 0) throw RangeError("slice: dimension " + std::to_string(d) + " fixed twice");
        fix[d] = static_cast<long long>(i);
    }
    Dataset out;
    out.dtype = ds.dtype;
    for (std::size_t d = 0; d < rank; ++d)
        if (fix[d] < 0) out.axes.push_back(ds.axes[d]);
    if (out.axes.empty()) out.axes.push_back(make_axis(1, 1.0, 0.0, "index"));
    const std::size_t n = ds.count();
    std::vector<std::size_t> idx(rank, 0);
    for (std::size_t k = 0; k < n; ++k) {
        bool keep = true;
        for (std::size_t d = 0; d < rank && keep; ++d) keep = fix[d] < 0 || idx[d] == static_cast<std::size_t>(fix[d]);
        if (keep) {
            if (ds.dtype == DType::real) out.real.push_back(ds.real[k]);
            else out.complex.push_back(ds.complex[k]);
        }
        for (std::size_t d = rank; d-- > 0;) {
            if (++idx[d] < ds.axes[d].n) break;
            idx[d] = 0;
        }
    }
    return out;
}

}  // namespace wemig
