#pragma once

#include "cmg/common.hpp"
#include "cmg/ohlc.hpp"
#include "cmg/indicators.hpp"
#include "cmg/chaos.hpp"
#include "cmg/target.hpp"
#include "cmg/dataset.hpp"
#include "cmg/model/params.hpp"
#include "cmg/model/layers.hpp"
#include "cmg/model/network.hpp"
#include "cmg/model/train.hpp"
#include "cmg/model/checkpoint.hpp"
#include "cmg/baselines.hpp"
#include "cmg/stats.hpp"
#include "cmg/eval.hpp"
#include "cmg/pipeline.hpp"
#include "cmg/config.hpp"
