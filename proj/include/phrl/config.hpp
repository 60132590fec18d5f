#pragma once

// Service configuration file (JSON). Every key is optional:
//   {"mode": "grouped", "k": 2, "seed": 7,
//    "exploration_days": 7, "clustering_day": 7,
//    "decision_times": ["10:00", "14:00", "21:00"], "training_time": "23:59",
//    "gamma": 0.95, "epsilon": 0.1, "max_iterations": 25, "stop_epsilon": 1e-5, "ridge": 1e-6,
//    "min_user_experiences": 9, "warm_start": true,
//    "reward": {"w_read": 0.5, "w_ratings": 0.5, "zero_sent_fraction": 0},
//    "mood": {"positive_threshold": 5, "source": "latest"},
//    "api_token": "", "timezone": "UTC"}

#include "phrl/codec.hpp"
#include "phrl/service.hpp"

#include <filesystem>
#include <string>

namespace phrl {

/// "HH:MM" to seconds after midnight; throws ConfigError.
Seconds parse_clock_time(const std::string& hhmm);
std::string format_clock_time(Seconds seconds_after_midnight);

/// Unknown keys are refused; the result is validated.
ServiceConfig service_config_from_json(const Json& j);
Json to_json(const ServiceConfig& cfg);
ServiceConfig load_service_config(const std::filesystem::path& path);

}  // namespace phrl
