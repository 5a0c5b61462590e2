#pragma once

// Umbrella header: the full exact-arithmetic toolkit.

#include "jetcal/rational.hpp"
#include "jetcal/multi_index.hpp"
#include "jetcal/varset.hpp"
#include "jetcal/polynomial.hpp"
#include "jetcal/rational_function.hpp"
#include "jetcal/parser.hpp"
#include "jetcal/matrix.hpp"
#include "jetcal/lie_algebra.hpp"
#include "jetcal/forms.hpp"
#include "jetcal/jets.hpp"
#include "jetcal/lie_equations.hpp"
#include "jetcal/gauge.hpp"
#include "jetcal/nonlinear_spencer.hpp"
#include "jetcal/diff_op.hpp"
