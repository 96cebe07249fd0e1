#pragma once

// Umbrella header.

#include "eigtest/error.hpp"
#include "eigtest/matrix_core.hpp"
#include "eigtest/spectral_model.hpp"
#include "eigtest/projector_norm.hpp"
#include "eigtest/parallel.hpp"
#include "eigtest/resampling.hpp"
#include "eigtest/hypothesis_tests.hpp"
#include "eigtest/simulation.hpp"
#include "eigtest/io.hpp"
