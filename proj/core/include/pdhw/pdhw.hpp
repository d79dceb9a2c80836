#pragma once

#include "pdhw/adaboost.hpp"
#include "pdhw/cohort.hpp"
#include "pdhw/crossval.hpp"
#include "pdhw/error.hpp"
#include "pdhw/features.hpp"
#include "pdhw/folds.hpp"
#include "pdhw/kinematics.hpp"
#include "pdhw/knn.hpp"
#include "pdhw/pressure.hpp"
#include "pdhw/signal.hpp"
#include "pdhw/stats.hpp"
#include "pdhw/svm.hpp"
#include "pdhw/synth.hpp"
#include "pdhw/util.hpp"
