#pragma once

#include "tsfs/errors.hpp"
#include "tsfs/jet.hpp"
#include "tsfs/tensor.hpp"
#include "tsfs/grid.hpp"
#include "tsfs/image_derivatives.hpp"
#include "tsfs/induction.hpp"
#include "tsfs/genericity.hpp"
#include "tsfs/reconstruction.hpp"
#include "tsfs/io.hpp"
#include "tsfs/sweep.hpp"
