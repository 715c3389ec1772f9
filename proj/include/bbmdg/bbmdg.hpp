#pragma once

#include "bbmdg/assembly.hpp"
#include "bbmdg/basis.hpp"
#include "bbmdg/bbm.hpp"
#include "bbmdg/config.hpp"
#include "bbmdg/diagnostics.hpp"
#include "bbmdg/errors.hpp"
#include "bbmdg/mesh.hpp"
#include "bbmdg/newton.hpp"
#include "bbmdg/quadrature.hpp"
#include "bbmdg/runner.hpp"
#include "bbmdg/steppers.hpp"
#include "bbmdg/transfer.hpp"
