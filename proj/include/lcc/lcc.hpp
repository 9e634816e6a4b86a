#pragma once

#include "lcc/assignment.hpp"
#include "lcc/conductance.hpp"
#include "lcc/correction.hpp"
#include "lcc/dataset.hpp"
#include "lcc/error.hpp"
#include "lcc/graph.hpp"
#include "lcc/kdtree.hpp"
#include "lcc/knn_graph.hpp"
#include "lcc/louvain.hpp"
#include "lcc/matrix.hpp"
#include "lcc/metrics.hpp"
#include "lcc/modularity.hpp"
#include "lcc/partition.hpp"
#include "lcc/pipeline.hpp"
#include "lcc/plan_io.hpp"
#include "lcc/pressure.hpp"
#include "lcc/report.hpp"
