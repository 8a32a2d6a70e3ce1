#pragma once

// External policy wire protocol: one JSON object per line in each
// direction, over a child process's stdio or a TCP socket.

#include <memory>
#include <string>

#include <json.hpp>

#include "fomnav/policy.hpp"

namespace fomnav::protocol {

/// Request message. Non-finite distances are written as null.
nlohmann::json snapshot_to_json(const policy::PolicySnapshot& snap);
/// Inverse of snapshot_to_json for the wire fields (features are not sent).
policy::PolicySnapshot snapshot_from_json(const nlohmann::json& j);

std::string encode_response(const GoalChoice& choice);
/// Throws ProtocolError unless `line` is {"kind": "frontier"|"object", "id": int}
/// naming an entity present in `snap`. {"kind": "none"} throws NoGoal.
GoalChoice parse_response(const std::string& line, const policy::PolicySnapshot& snap);

class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send_line(const std::string& line) = 0;
  /// Throws ProtocolError on end of stream.
  virtual std::string recv_line() = 0;
};

/// Runs `command` through /bin/sh -c with piped stdin/stdout.
std::unique_ptr<Channel> spawn_process(const std::string& command);
/// Connects to host:port.
std::unique_ptr<Channel> connect_tcp(const std::string& host, int port);

class ExternalPolicy : public policy::Policy {
 public:
  explicit ExternalPolicy(std::unique_ptr<Channel> channel) : channel_(std::move(channel)) {}
  std::string name() const override { return "extern"; }
  GoalChoice select(const policy::PolicySnapshot& snap, const policy::OracleContext*) override;

 private:
  std::unique_ptr<Channel> channel_;
};

/// "cmd" runs a process; "tcp://host:port" or a bare "host:port" connects.
std::unique_ptr<ExternalPolicy> make_external(const std::string& target);

}  // namespace fomnav::protocol
