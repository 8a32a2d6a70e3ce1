#include "fomnav/protocol.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <regex>
#include <thread>

namespace fomnav::protocol {

using nlohmann::json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double num_of(const json& j) { return j.is_null() ? kInf : j.get<double>(); }

}  // namespace

json snapshot_to_json(const policy::PolicySnapshot& snap) {
  json j;
  j["step"] = snap.step;
  j["target"] = snap.target;
  j["frontiers"] = json::array();
  for (const auto& f : snap.frontiers) {
    j["frontiers"].push_back({{"id", f.id},
                              {"center", {f.center.x(), f.center.y()}},
                              {"endpoints", f.endpoints},
                              {"dist", num(f.dist)}});
  }
  j["objects"] = json::array();
  for (const auto& o : snap.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"center", {o.center.x(), o.center.y(), o.center.z()}},
                            {"bbox", o.bbox},
                            {"dist", num(o.dist)},
                            {"top_category", o.top_category},
                            {"category_dist", o.category_dist}});
  }
  j["path"] = json::array();
  for (const auto& p : snap.path) j["path"].push_back({p.x(), p.y()});
  return j;
}

policy::PolicySnapshot snapshot_from_json(const json& j) {
  try {
    policy::PolicySnapshot s;
    s.step = j.at("step").get<int>();
    s.target = j.at("target").get<std::string>();
    for (const auto& f : j.at("frontiers")) {
      policy::FrontierRecord r;
      r.id = f.at("id").get<int>();
      const auto c = f.at("center").get<std::vector<double>>();
      if (c.size() != 2) throw ProtocolError("frontier center must have 2 values");
      r.center = {c[0], c[1]};
      r.endpoints = f.at("endpoints").get<std::array<double, 4>>();
      r.dist = num_of(f.at("dist"));
      s.frontiers.push_back(std::move(r));
    }
    for (const auto& o : j.at("objects")) {
      policy::ObjectRecord r;
      r.id = o.at("id").get<int>();
      const auto c = o.at("center").get<std::vector<double>>();
      if (c.size() != 3) throw ProtocolError("object center must have 3 values");
      r.center = {c[0], c[1], c[2]};
      r.bbox = o.at("bbox").get<std::array<double, 24>>();
      r.dist = num_of(o.at("dist"));
      r.top_category = o.at("top_category").get<std::string>();
      r.category_dist = o.at("category_dist").get<std::vector<double>>();
      s.objects.push_back(std::move(r));
    }
    for (const auto& p : j.at("path")) {
      const auto v = p.get<std::vector<double>>();
      if (v.size() != 2) throw ProtocolError("path point must have 2 values");
      s.path.emplace_back(v[0], v[1]);
    }
    return s;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed request: ") + e.what());
  }
}

std::string encode_response(const GoalChoice& choice) {
  return json{{"kind", to_string(choice.kind)}, {"id", choice.id}}.dump();
}

GoalChoice parse_response(const std::string& line, const policy::PolicySnapshot& snap) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError("response is not JSON: " + std::string(e.what()));
  }
  if (j.is_object() && j.size() == 1 && j.value("kind", json()) == "none")
    throw NoGoal("external policy has no goal");
  if (!j.is_object() || !j.contains("kind") || !j.contains("id") || !j["kind"].is_string() ||
      !j["id"].is_number_integer())
    throw ProtocolError("response must be {\"kind\": str, \"id\": int}: " + line);
  GoalChoice c;
  const auto kind = j["kind"].get<std::string>();
  if (kind == "frontier") {
    c.kind = GoalKind::Frontier;
  } else if (kind == "object") {
    c.kind = GoalKind::Object;
  } else {
    throw ProtocolError("unknown goal kind '" + kind + "'");
  }
  c.id = j["id"].get<int>();
  const bool live = c.kind == GoalKind::Frontier ? snap.has_frontier(c.id) : snap.has_object(c.id);
  if (!live) throw ProtocolError("response id " + std::to_string(c.id) + " is not in the request");
  return c;
}

namespace {

constexpr int kReplyTimeoutMs = 30000;

class FdChannel : public Channel {
 public:
  FdChannel(int in_fd, int out_fd) : in_(in_fd), out_(out_fd) {}
  ~FdChannel() override {
    if (out_ >= 0 && out_ != in_) ::close(out_);
    if (in_ >= 0) ::close(in_);
  }

  void send_line(const std::string& line) override {
    std::string msg = line;
    msg.push_back('\n');
    std::size_t off = 0;
    while (off < msg.size()) {
      const ssize_t n = ::write(out_, msg.data() + off, msg.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("policy channel write failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string recv_line() override {
    for (;;) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      pollfd p{in_, POLLIN, 0};
      const int r = ::poll(&p, 1, kReplyTimeoutMs);
      if (r == 0) throw ProtocolError("policy did not answer in time");
      if (r < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
      }
      char chunk[4096];
      const ssize_t n = ::read(in_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw ProtocolError(std::string("policy channel read failed: ") + std::strerror(errno));
      }
      if (n == 0) throw ProtocolError("policy closed the channel");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  int in_, out_;
  std::string buffer_;
};

class ProcessChannel : public FdChannel {
 public:
  ProcessChannel(int in_fd, int out_fd, pid_t pid) : FdChannel(in_fd, out_fd), pid_(pid) {}
  ~ProcessChannel() override {
    ::close(out_);
    out_ = -1;
    for (int i = 0; i < 100; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

 private:
  pid_t pid_;
};

}  // namespace

std::unique_ptr<Channel> spawn_process(const std::string& command) {
  // A dead child must surface as a write error, not kill the host process.
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0) throw ProtocolError("pipe failed");
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ProtocolError("pipe failed");
  }
  const pid_t pid = ::fork();
  if (pid < 0) throw ProtocolError("fork failed");
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  ::fcntl(to_child[1], F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child[0], F_SETFD, FD_CLOEXEC);
  return std::make_unique<ProcessChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<Channel> connect_tcp(const std::string& host, int port) {
  ::signal(SIGPIPE, SIG_IGN);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || !res)
    throw ProtocolError("cannot resolve " + host);
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw ProtocolError("cannot connect to " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd);
}

GoalChoice ExternalPolicy::select(const policy::PolicySnapshot& snap, const policy::OracleContext*) {
  channel_->send_line(snapshot_to_json(snap).dump());
  return parse_response(channel_->recv_line(), snap);
}

std::unique_ptr<ExternalPolicy> make_external(const std::string& target) {
  static const std::regex hostport(R"(^(?:tcp://)?([A-Za-z0-9.\-]+):(\d{1,5})$)");
  std::smatch m;
  if (std::regex_match(target, m, hostport))
    return std::make_unique<ExternalPolicy>(connect_tcp(m[1].str(), std::stoi(m[2].str())));
  if (target.empty()) throw InvalidInput("empty external policy command");
  return std::make_unique<ExternalPolicy>(spawn_process(target));
}

}  // namespace fomnav::protocol
