#pragma once

#include <acsense/agent.hpp>
#include <acsense/belief.hpp>
#include <acsense/checkpoint.hpp>
#include <acsense/episode.hpp>
#include <acsense/errors.hpp>
#include <acsense/metrics.hpp>
#include <acsense/metrics_io.hpp>
#include <acsense/mlp.hpp>
#include <acsense/process_model.hpp>
#include <acsense/ranking.hpp>
#include <acsense/reward.hpp>
#include <acsense/sweep.hpp>
