#pragma once

#include "npmix/assignment.hpp"
#include "npmix/benchmark.hpp"
#include "npmix/commands.hpp"
#include "npmix/config.hpp"
#include "npmix/datasets.hpp"
#include "npmix/em.hpp"
#include "npmix/error.hpp"
#include "npmix/evaluation.hpp"
#include "npmix/gaussian.hpp"
#include "npmix/hellinger.hpp"
#include "npmix/io.hpp"
#include "npmix/kmeans.hpp"
#include "npmix/linkage.hpp"
#include "npmix/matching.hpp"
#include "npmix/mixture.hpp"
#include "npmix/partition.hpp"
#include "npmix/pipeline.hpp"
#include "npmix/quadrature.hpp"
#include "npmix/separation.hpp"
#include "npmix/transport.hpp"
