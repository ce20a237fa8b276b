#include "eipl/subprocess_backend.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <sstream>

#include "eipl/errors.hpp"

namespace eipl {

namespace {

using Clock = std::chrono::steady_clock;

class Fd {
 public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Fd& operator=(Fd&& other) noexcept {
    if (this != &other) {
      reset();
      fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
  }
  ~Fd() { reset(); }

  int get() const { return fd_; }
  void reset() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

struct Pipe {
  Fd read;
  Fd write;
};

Pipe make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw BackendUnavailableError(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

bool is_executable_file(const std::filesystem::path& path) {
  struct stat st {};
  return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(path.c_str(), X_OK) == 0;
}

bool command_available(const std::string& program) {
  if (program.find('/') != std::string::npos) return is_executable_file(program);
  const char* path_env = std::getenv("PATH");
  if (!path_env) return false;
  std::stringstream dirs(path_env);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    if (!dir.empty() && is_executable_file(std::filesystem::path(dir) / program)) return true;
  }
  return false;
}

struct ProcessOutcome {
  int exit_code = -1;
  bool killed_at_ceiling = false;
  std::string out;
  std::string err;
};

ProcessOutcome run_process(const std::vector<std::string>& command, const std::string& input,
                           Clock::time_point deadline) {
  Pipe in = make_pipe();
  Pipe out = make_pipe();
  Pipe err = make_pipe();
  Pipe exec_status = make_pipe();

  std::vector<char*> argv;
  for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
  argv.push_back(nullptr);

  const pid_t pid = ::fork();
  if (pid < 0) throw BackendUnavailableError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in.read.get(), STDIN_FILENO);
    ::dup2(out.write.get(), STDOUT_FILENO);
    ::dup2(err.write.get(), STDERR_FILENO);
    ::execvp(argv[0], argv.data());
    const int code = errno;
    [[maybe_unused]] auto n = ::write(exec_status.write.get(), &code, sizeof code);
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  in.read.reset();
  out.write.reset();
  err.write.reset();
  exec_status.write.reset();

  int exec_errno = 0;
  if (::read(exec_status.read.get(), &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    throw BackendUnavailableError("cannot execute runner '" + command.front() + "': " + std::strerror(exec_errno));
  }

  ::fcntl(in.write.get(), F_SETFL, O_NONBLOCK);
  ProcessOutcome outcome;
  std::size_t written = 0;
  if (input.empty()) in.write.reset();

  char buffer[65536];
  while (out.read.get() >= 0 || err.read.get() >= 0) {
    const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
    if (remaining <= 0) {
      outcome.killed_at_ceiling = true;
      ::kill(-pid, SIGKILL);
      break;
    }
    pollfd fds[3];
    nfds_t count = 0;
    auto watch = [&](const Fd& fd, short events) {
      if (fd.get() >= 0) fds[count++] = pollfd{fd.get(), events, 0};
    };
    watch(out.read, POLLIN);
    watch(err.read, POLLIN);
    watch(in.write, POLLOUT);
    const int ready = ::poll(fds, count, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (ready < 0 && errno != EINTR) break;
    for (nfds_t i = 0; i < count; ++i) {
      if (fds[i].revents == 0) continue;
      if (fds[i].fd == in.write.get()) {
        if (fds[i].revents & (POLLERR | POLLHUP)) {
          in.write.reset();
          continue;
        }
        const ssize_t n = ::write(in.write.get(), input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<std::size_t>(n);
        if ((n < 0 && errno != EAGAIN) || written == input.size()) in.write.reset();
        continue;
      }
      const ssize_t n = ::read(fds[i].fd, buffer, sizeof buffer);
      const bool is_out = fds[i].fd == out.read.get();
      if (n > 0) {
        (is_out ? outcome.out : outcome.err).append(buffer, static_cast<std::size_t>(n));
      } else if (n == 0 || errno != EINTR) {
        (is_out ? out.read : err.read).reset();
      }
    }
  }

  int status = 0;
  ::waitpid(pid, &status, 0);
  // Any grandchildren left behind by the runner go with its group.
  ::kill(-pid, SIGKILL);
  if (WIFEXITED(status)) outcome.exit_code = WEXITSTATUS(status);
  return outcome;
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> parts;
  std::istringstream in(command);
  std::string part;
  while (in >> part) parts.push_back(part);
  return parts;
}

SubprocessBackend::SubprocessBackend(SubprocessBackendConfig config) : config_(std::move(config)) {
  if (config_.command.empty()) throw BackendUnavailableError("no runner command configured");
  // A runner that dies before reading its input must not take the engine down.
  ::signal(SIGPIPE, SIG_IGN);
}

SuiteResult SubprocessBackend::run(const std::string& code, const std::string& function_name,
                                   const std::vector<TestCase>& suite) {
  if (!command_available(config_.command.front())) {
    throw BackendUnavailableError("runner '" + config_.command.front() + "' is missing or not executable");
  }
  long long ceiling_ms = config_.ceiling_margin_ms;
  for (const TestCase& tc : suite) ceiling_ms += tc.timeout_ms;

  const auto start = Clock::now();
  ProcessOutcome proc =
      run_process(config_.command, runner_input(code, function_name, suite).dump() + "\n",
                  start + std::chrono::milliseconds(ceiling_ms));
  const auto runtime =
      std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start).count();

  if (proc.killed_at_ceiling) {
    return SuiteResult::from_cases(
        SuiteResult::uniform(suite.size(), CaseStatus::Timeout,
                             "runner exceeded whole-run ceiling of " + std::to_string(ceiling_ms) + " ms")
            .case_results,
        0, runtime);
  }
  if (proc.exit_code != 0) {
    throw ProtocolError("runner exited with status " + std::to_string(proc.exit_code) + ": " + proc.err);
  }
  const Json output = Json::parse(proc.out, nullptr, false);
  if (output.is_discarded()) throw ProtocolError("runner stdout is not a JSON document");
  return SuiteResult::from_cases(parse_runner_output(output, suite.size()), 0, runtime);
}

}  // namespace eipl
