#pragma once

#include "fpg/errors.hpp"
#include "fpg/specfun.hpp"
#include "fpg/quadrature.hpp"
#include "fpg/fraccalc.hpp"
#include "fpg/problem.hpp"
#include "fpg/assembly.hpp"
#include "fpg/solver.hpp"
#include "fpg/manufactured.hpp"
#include "fpg/analysis.hpp"
#include "fpg/verify.hpp"
#include "fpg/config.hpp"
