#pragma once

#include "vstates/errors.hpp"
#include "vstates/version.hpp"
#include "vstates/specfun.hpp"
#include "vstates/spectrum.hpp"
#include "vstates/parallel.hpp"
#include "vstates/contour.hpp"
#include "vstates/solver.hpp"
#include "vstates/continuation.hpp"
#include "vstates/io.hpp"
