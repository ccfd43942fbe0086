// Umbrella header pulling in the whole library.

#pragma once

#include <cofu/eval.hpp>
#include <cofu/io.hpp>
#include <cofu/lasso.hpp>
#include <cofu/lbfgs.hpp>
#include <cofu/ops.hpp>
#include <cofu/parallel.hpp>
#include <cofu/rng.hpp>
#include <cofu/selection.hpp>
#include <cofu/simgen.hpp>
#include <cofu/solver_glm.hpp>
#include <cofu/solver_lr.hpp>
#include <cofu/types.hpp>
#include <cofu/version.hpp>
