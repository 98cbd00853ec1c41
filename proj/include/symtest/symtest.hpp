#pragma once

#include "symtest/condsym.hpp"
#include "symtest/descriptor.hpp"
#include "symtest/error.hpp"
#include "symtest/groups.hpp"
#include "symtest/invariance.hpp"
#include "symtest/kernels.hpp"
#include "symtest/mmd.hpp"
#include "symtest/parallel.hpp"
#include "symtest/random.hpp"
#include "symtest/stats.hpp"
#include "symtest/synthdata.hpp"
#include "symtest/test_result.hpp"
#include "symtest/version.hpp"
#include "symtest/harness/csv.hpp"
#include "symtest/harness/experiment.hpp"
#include "symtest/harness/preprocess.hpp"
#include "symtest/harness/report.hpp"
#include "symtest/harness/tuning.hpp"
