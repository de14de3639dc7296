#pragma once

#include "lpwfcm/arff.hpp"
#include "lpwfcm/dataset.hpp"
#include "lpwfcm/error.hpp"
#include "lpwfcm/experiment.hpp"
#include "lpwfcm/fcm.hpp"
#include "lpwfcm/learners.hpp"
#include "lpwfcm/metrics.hpp"
#include "lpwfcm/model.hpp"
#include "lpwfcm/nmi.hpp"
#include "lpwfcm/pairwise.hpp"
#include "lpwfcm/report.hpp"
#include "lpwfcm/statcmp.hpp"
