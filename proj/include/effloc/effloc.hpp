#pragma once

#include "effloc/error.hpp"
#include "effloc/bessel.hpp"
#include "effloc/geometry.hpp"
#include "effloc/discretize.hpp"
#include "effloc/radial.hpp"
#include "effloc/functionals.hpp"
#include "effloc/reference.hpp"
#include "effloc/bounds.hpp"
#include "effloc/bridge.hpp"
#include "effloc/harness.hpp"
