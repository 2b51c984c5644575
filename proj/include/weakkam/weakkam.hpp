#pragma once

#include "weakkam/analysis.hpp"
#include "weakkam/barrier.hpp"
#include "weakkam/contact.hpp"
#include "weakkam/critical.hpp"
#include "weakkam/error.hpp"
#include "weakkam/grid.hpp"
#include "weakkam/measure.hpp"
#include "weakkam/model.hpp"
#include "weakkam/paths.hpp"
#include "weakkam/tolerances.hpp"
#include "weakkam/trig_poly.hpp"
#include "weakkam/vanishing.hpp"

namespace wkam {
inline constexpr const char* kVersion = "0.1.0";
}
