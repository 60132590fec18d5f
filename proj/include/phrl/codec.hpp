#pragma once

// Line-oriented JSON encodings of events, decisions, policies and cluster
// models. Key order is fixed so encoded lines are byte-stable.
//
// Event line:    {"user_id":"u1","ts":36000,"kind":"rating","value":4}
//                value is the rating for kind=rating, the message id otherwise.
// Policy:        {"schema":"phrl.policy","schema_version":1,"key":...,"version":...,
//                 "dimension":192,"weights":[...],"config":{...},"scheme":[...],...}
// Cluster model: {"schema":"phrl.cluster_model","schema_version":1,"k":...,...}

#include "phrl/engine.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace phrl {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::ordered_json;

inline constexpr int kPolicySchemaVersion = 1;
inline constexpr int kClusterSchemaVersion = 1;

Json to_json(const Event& e);
Event event_from_json(const Json& j);

Json to_json(const StateVector& s);
StateVector state_from_json(const Json& j);

Json to_json(const MessageEntry& m);
MessageEntry message_from_json(const Json& j);

Json to_json(const Decision& d);
Decision decision_from_json(const Json& j);

Json to_json(const Trace& t);
Trace trace_from_json(const Json& j);

Json to_json(const Policy& p);
/// Refuses wrong schema, version, dimension or invalid configuration.
Policy policy_from_json(const Json& j);

Json to_json(const ClusterModel& m);
ClusterModel cluster_model_from_json(const Json& j);

/// One compact line, no trailing newline.
std::string encode_line(const Json& j);
/// Throws FormatError on malformed text.
Json parse_json(const std::string& text);

}  // namespace phrl
