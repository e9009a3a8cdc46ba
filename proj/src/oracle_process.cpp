#include "nlx/oracle_process.hpp"

#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

#include "nlx/error.hpp"
#include "nlx/json_io.hpp"

namespace nlx {

namespace {

[[noreturn]] void oracle_error(const std::string& what) { throw Error(ErrorCode::Oracle, "oracle: " + what); }

}  // namespace

std::vector<std::string> shell_argv(const std::string& command) { return {"/bin/sh", "-c", command}; }

SubprocessClassifier::SubprocessClassifier(std::vector<std::string> argv, FeatureSchema schema)
    : schema_(std::move(schema)) {
  if (argv.empty()) oracle_error("empty command");
  int sv[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    oracle_error(std::string("socketpair failed: ") + std::strerror(errno));
  }
  std::vector<char*> cargv;
  for (auto& a : argv) cargv.push_back(a.data());
  cargv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(sv[0]);
    ::close(sv[1]);
    oracle_error(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::dup2(sv[1], STDIN_FILENO);
    ::dup2(sv[1], STDOUT_FILENO);
    ::execvp(cargv[0], cargv.data());
    ::_exit(127);
  }
  ::close(sv[1]);
  fd_ = sv[0];
  pid_ = pid;
}

SubprocessClassifier::~SubprocessClassifier() {
  if (fd_ >= 0) ::close(fd_);
  if (pid_ > 0) {
    int status = 0;
    // Closing the socket is the end-of-input signal; a child that ignores it is killed.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string SubprocessClassifier::read_line() const {
  while (true) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    const ssize_t got = ::recv(fd_, chunk, sizeof chunk, 0);
    if (got < 0 && errno == EINTR) continue;
    if (got <= 0) oracle_error("process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(got));
  }
}

std::string SubprocessClassifier::predict(const Example& ex) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const std::uint64_t id = next_id_++;
  json request;
  request["id"] = id;
  request["example"] = example_to_json(schema_, ex);
  const std::string line = request.dump() + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) oracle_error("cannot write request: " + std::string(std::strerror(errno)));
    sent += static_cast<std::size_t>(n);
  }
  const std::string reply = read_line();
  try {
    const json r = json::parse(reply);
    if (r.at("id").get<std::uint64_t>() != id) oracle_error("response id does not match request " + std::to_string(id));
    return r.at("label").get<std::string>();
  } catch (const json::exception& e) {
    oracle_error("malformed response '" + reply + "': " + e.what());
  }
}

std::uint64_t SubprocessClassifier::requests() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return next_id_;
}

}  // namespace nlx
