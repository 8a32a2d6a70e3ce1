#pragma once

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>

#include <doctest.h>

// Spawns the stand-alone peer listening on an ephemeral port.
struct PeerServer {
  pid_t pid = -1;
  int port = -1;
  std::string port_file;

  explicit PeerServer(int sessions) {
    port_file = (std::filesystem::temp_directory_path() / ("fomnav_peer_" + std::to_string(::getpid()) + ".port")).string();
    std::filesystem::remove(port_file);
    const std::string s = std::to_string(sessions);
    const char* argv[] = {PEER_POLICY, "--listen", "0", "--port-file", port_file.c_str(), "--sessions", s.c_str(), nullptr};
    REQUIRE(::posix_spawn(&pid, PEER_POLICY, nullptr, nullptr, const_cast<char* const*>(argv), environ) == 0);
    for (int i = 0; i < 500 && port < 0; ++i) {
      std::ifstream in(port_file);
      if (!(in >> port)) {
        port = -1;
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
    }
    REQUIRE(port > 0);
  }
  ~PeerServer() {
    int status = 0;
    if (::waitpid(pid, &status, WNOHANG) == 0) {
      ::kill(pid, SIGTERM);
      ::waitpid(pid, &status, 0);
    }
    std::filesystem::remove(port_file);
  }
};
