#pragma once

#include "propsurro/common.hpp"
#include "propsurro/config.hpp"
#include "propsurro/dataset.hpp"
#include "propsurro/generative.hpp"
#include "propsurro/gp.hpp"
#include "propsurro/linalg.hpp"
#include "propsurro/metrics.hpp"
#include "propsurro/mlp.hpp"
#include "propsurro/multifidelity.hpp"
#include "propsurro/optim.hpp"
#include "propsurro/rng.hpp"
#include "propsurro/serialize.hpp"
#include "propsurro/svg.hpp"
#include "propsurro/synthdata.hpp"
