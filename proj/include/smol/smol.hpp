#pragma once

// Umbrella header.

#include <smol/archive.hpp>
#include <smol/cli.hpp>
#include <smol/config.hpp>
#include <smol/cvt.hpp>
#include <smol/parallel.hpp>
#include <smol/random.hpp>
#include <smol/runner.hpp>
#include <smol/schedules.hpp>
#include <smol/stats.hpp>
#include <smol/task.hpp>
#include <smol/tasks/crawler.hpp>
#include <smol/tasks/scaled_arm.hpp>
#include <smol/types.hpp>
#include <smol/variation.hpp>
