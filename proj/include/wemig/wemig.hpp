#pragma once

#include "wemig/angle.hpp"
#include "wemig/annihilator.hpp"
#include "wemig/config.hpp"
#include "wemig/container.hpp"
#include "wemig/dottest.hpp"
#include "wemig/dsr.hpp"
#include "wemig/events.hpp"
#include "wemig/migrate.hpp"
#include "wemig/rays.hpp"
#include "wemig/recon.hpp"
#include "wemig/spectral.hpp"
#include "wemig/synthetics.hpp"
#include "wemig/taper.hpp"
