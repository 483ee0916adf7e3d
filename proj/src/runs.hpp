// Experiment bodies, one per acceptance criterion.
#pragma once

#include <vector>

#include "ttlab/experiments.hpp"

namespace ttlab::runs {

std::vector<Experiment> all_experiments();

}  // namespace ttlab::runs
