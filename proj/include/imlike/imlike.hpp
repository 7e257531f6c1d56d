#pragma once

#include "imlike/behrens_fisher.hpp"
#include "imlike/csv.hpp"
#include "imlike/diagnostics.hpp"
#include "imlike/im_engine.hpp"
#include "imlike/inner_sampler.hpp"
#include "imlike/marginal.hpp"
#include "imlike/models.hpp"
#include "imlike/possibility.hpp"
#include "imlike/random.hpp"
#include "imlike/special.hpp"
#include "imlike/types.hpp"
