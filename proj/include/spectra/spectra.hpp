#pragma once

#include "spectra/conic.hpp"
#include "spectra/convert.hpp"
#include "spectra/core.hpp"
#include "spectra/error.hpp"
#include "spectra/harness.hpp"
#include "spectra/io.hpp"
#include "spectra/ops.hpp"
#include "spectra/reduce.hpp"
#include "spectra/validate.hpp"
