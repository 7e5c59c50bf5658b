#pragma once

#include "fastop/algorithms.hpp"
#include "fastop/batch.hpp"
#include "fastop/bench.hpp"
#include "fastop/composite.hpp"
#include "fastop/errors.hpp"
#include "fastop/leaf.hpp"
#include "fastop/operator.hpp"
#include "fastop/scalar.hpp"
#include "fastop/scalar_array.hpp"
#include "fastop/transforms.hpp"
#include "fastop/verify.hpp"
