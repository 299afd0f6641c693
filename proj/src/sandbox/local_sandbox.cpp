// Copyright (c) 2026, chart-tir authors
// SPDX-License-Identifier: Apache-2.0

#include <fcntl.h>
#include <grp.h>
#include <poll.h>
#include <sched.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <thread>

#include "core/error.hpp"
#include "core/text.hpp"
#include "sandbox/sandbox.hpp"

extern char** environ;

namespace ctir {
namespace fs = std::filesystem;
namespace {

using Clock = std::chrono::steady_clock;

std::string resolve_executable(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return ::access(name.c_str(), X_OK) == 0 ? name : std::string{};
  }
  const char* path = std::getenv("PATH");
  for (const auto& dir : text::split(path ? path : "/usr/bin:/bin", ':')) {
    if (dir.empty()) continue;
    const auto candidate = dir + "/" + name;
    if (::access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return {};
}

// Owns the per-job temp tree: <root>/work is the program's cwd, <root>/home
// holds HOME/TMPDIR so tool caches do not show up as artifacts.
class JobDir {
 public:
  JobDir() {
    std::string tmpl = (fs::temp_directory_path() / "ctir-sbx-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      fail(ErrorCode::SpawnFailure, std::string("mkdtemp failed: ") + std::strerror(errno));
    }
    root_ = tmpl;
    fs::create_directory(work());
    fs::create_directory(home());
  }
  ~JobDir() {
    if (keep_) return;
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  JobDir(const JobDir&) = delete;
  JobDir& operator=(const JobDir&) = delete;

  fs::path work() const { return root_ / "work"; }
  fs::path home() const { return root_ / "home"; }
  void give_to(uid_t uid, gid_t gid) const {
    for (const auto& p : {root_, work(), home()}) {
      if (::chown(p.c_str(), uid, gid) != 0) {
        fail(ErrorCode::SpawnFailure, std::string("chown failed: ") + std::strerror(errno));
      }
    }
  }
  void keep() { keep_ = true; }

 private:
  fs::path root_;
  bool keep_ = false;
};

void write_file(const fs::path& path, const void* data, std::size_t size, bool read_only) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::SpawnFailure, "cannot write " + path.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (read_only) fs::permissions(path, fs::perms::owner_read | fs::perms::group_read | fs::perms::others_read);
}

bool safe_relative(const std::string& name) {
  if (name.empty()) return false;
  const fs::path p(name);
  if (p.is_absolute()) return false;
  for (const auto& part : p) {
    if (part == "..") return false;
  }
  return true;
}

// Appends to `buf` keeping at most `cap` bytes; returns true if bytes were dropped.
bool append_capped(std::string& buf, const char* data, std::size_t n, std::size_t cap) {
  const std::size_t room = buf.size() < cap ? cap - buf.size() : 0;
  buf.append(data, std::min(room, n));
  return n > room;
}

// Drops every occurrence of `prefix` so output does not depend on the job directory.
void strip_prefix_all(std::string& s, const std::string& prefix) {
  for (auto pos = s.find(prefix); pos != std::string::npos; pos = s.find(prefix, pos)) s.erase(pos, prefix.size());
}

void kill_group(pid_t pgid) {
  if (pgid > 0) ::kill(-pgid, SIGKILL);
}

}  // namespace

void validate(const ExecLimits& limits) {
  if (!(limits.wall_timeout_s > 0.0)) fail(ErrorCode::InvalidArgument, "wall_timeout must be > 0");
  if (limits.stdout_cap_bytes == 0) fail(ErrorCode::InvalidArgument, "stdout_cap must be > 0");
  if (limits.cpu_timeout_s < 0.0) fail(ErrorCode::InvalidArgument, "cpu_timeout must be >= 0");
}

std::string_view to_string(ExitKind k) noexcept {
  switch (k) {
    case ExitKind::Ok: return "ok";
    case ExitKind::NonZero: return "nonzero";
    case ExitKind::Timeout: return "timeout";
    case ExitKind::Killed: return "killed";
    case ExitKind::LaunchError: return "launch_error";
  }
  return "launch_error";
}

std::vector<ExecResult> Sandbox::execute_many(const std::vector<ExecRequest>& jobs) {
  std::vector<ExecResult> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        results[i] = execute(jobs[i]);
      } catch (const std::exception& e) {
        results[i].exit = ExitKind::LaunchError;
        results[i].exit_code = -1;
        results[i].launch_error = e.what();
      }
    }
  };
  const std::size_t n_workers = std::min(jobs.size(), std::max<std::size_t>(1, pool_size()));
  std::vector<std::jthread> workers;
  workers.reserve(n_workers);
  for (std::size_t w = 0; w < n_workers; ++w) workers.emplace_back(worker);
  return results;
}

LocalSandbox::LocalSandbox(LocalSandboxOptions options)
    : options_(std::move(options)),
      slots_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.pool_size, 1, 1024))) {
  if (options_.interpreter_cmd.empty()) fail(ErrorCode::InvalidArgument, "interpreter command is empty");
  if (options_.pool_size == 0) options_.pool_size = 1;
}

std::string LocalSandbox::identity() const {
  std::string cmd;
  for (const auto& part : options_.interpreter_cmd) {
    if (!cmd.empty()) cmd.push_back(' ');
    cmd += part;
  }
  return "local:" + cmd;
}

ExecResult LocalSandbox::execute(const ExecRequest& request) {
  validate(request.limits);
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return run(request);
}

ExecResult LocalSandbox::run(const ExecRequest& request) {
  const auto interpreter = resolve_executable(options_.interpreter_cmd.front());
  if (interpreter.empty()) {
    fail(ErrorCode::SandboxUnavailable, "interpreter '" + options_.interpreter_cmd.front() + "' not found");
  }

  JobDir dir;
  constexpr uid_t kNobody = 65534;
  const bool drop = options_.drop_root && ::geteuid() == 0;
  if (drop) dir.give_to(kNobody, kNobody);
  std::vector<std::string> inputs;
  for (const auto& seed : request.seed_files) {
    if (!safe_relative(seed.name)) fail(ErrorCode::InvalidArgument, "bad seed file name '" + seed.name + "'");
    write_file(dir.work() / seed.name, seed.data.data(), seed.data.size(), seed.read_only);
    inputs.push_back(fs::path(seed.name).lexically_normal().string());
  }
  const auto program = dir.work() / options_.program_name;
  write_file(program, request.source.data(), request.source.size(), false);
  inputs.push_back(options_.program_name);

  // Everything the child touches is prepared before fork.
  std::vector<std::string> args = options_.interpreter_cmd;
  args.push_back(options_.program_name);
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  // The child sees an allowlisted environment; credentials in the host
  // environment (API keys) never reach untrusted code.
  std::vector<std::string> env_store;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view kv(*e);
    if (kv.starts_with("PATH=") || kv.starts_with("LANG=") || kv.starts_with("LC_ALL=") ||
        kv.starts_with("LC_CTYPE=")) {
      env_store.emplace_back(kv);
    }
  }
  env_store.push_back("HOME=" + dir.home().string());
  env_store.push_back("TMPDIR=" + dir.home().string());
  env_store.push_back("MPLCONFIGDIR=" + dir.home().string());
  env_store.push_back("MPLBACKEND=Agg");
  env_store.push_back("OPENBLAS_NUM_THREADS=1");
  std::vector<char*> envp;
  for (auto& e : env_store) envp.push_back(e.data());
  envp.push_back(nullptr);

  const std::string workdir = dir.work().string();
  const auto& limits = request.limits;
  rlimit cpu{};
  const bool limit_cpu = limits.cpu_timeout_s > 0.0;
  cpu.rlim_cur = static_cast<rlim_t>(std::ceil(limits.cpu_timeout_s));
  cpu.rlim_max = cpu.rlim_cur + 1;
  rlimit mem{};
  mem.rlim_cur = mem.rlim_max = static_cast<rlim_t>(limits.memory_limit_bytes);
  rlimit no_core{0, 0};

  int out_pipe[2];
  int err_pipe[2];
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) fail(ErrorCode::SpawnFailure, "pipe failed");
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    fail(ErrorCode::SpawnFailure, "pipe failed");
  }

  const auto start = Clock::now();
  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    fail(ErrorCode::SpawnFailure, std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    if (!limits.network_allowed) ::unshare(CLONE_NEWNET);  // best effort without privileges
    const int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull >= 0) ::dup2(devnull, 0);
    ::dup2(out_pipe[1], 1);
    ::dup2(err_pipe[1], 2);
    if (::chdir(workdir.c_str()) != 0) ::_exit(126);
    if (limit_cpu) ::setrlimit(RLIMIT_CPU, &cpu);
    if (limits.memory_limit_bytes > 0) ::setrlimit(RLIMIT_AS, &mem);
    ::setrlimit(RLIMIT_CORE, &no_core);
    if (drop && (::setgroups(0, nullptr) != 0 || ::setgid(kNobody) != 0 || ::setuid(kNobody) != 0)) ::_exit(126);
    ::execve(interpreter.c_str(), argv.data(), envp.data());
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  ExecResult result;
  const std::size_t cap = limits.stdout_cap_bytes;
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(limits.wall_timeout_s));
  std::array<pollfd, 2> fds{pollfd{out_pipe[0], POLLIN, 0}, pollfd{err_pipe[0], POLLIN, 0}};
  bool timed_out = false;
  bool reaped = false;
  int status = 0;
  std::array<char, 8192> buf{};

  auto drain = [&](int timeout_ms) {
    const int n = ::poll(fds.data(), fds.size(), timeout_ms);
    if (n <= 0) return;
    for (std::size_t i = 0; i < fds.size(); ++i) {
      if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      const ssize_t r = ::read(fds[i].fd, buf.data(), buf.size());
      if (r <= 0) {
        ::close(fds[i].fd);
        fds[i].fd = -1;
        continue;
      }
      if (i == 0) {
        if (append_capped(result.stdout_text, buf.data(), static_cast<std::size_t>(r), cap)) {
          result.truncated = true;
        }
      } else {
        append_capped(result.stderr_text, buf.data(), static_cast<std::size_t>(r), cap);
      }
    }
  };

  while (!reaped) {
    if (::waitpid(pid, &status, WNOHANG) == pid) {
      reaped = true;
      break;
    }
    const auto now = Clock::now();
    if (now >= deadline) {
      timed_out = true;
      kill_group(pid);
      ::waitpid(pid, &status, 0);
      reaped = true;
      break;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    if (fds[0].fd < 0 && fds[1].fd < 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::min<long long>(left + 1, 5)));
    } else {
      drain(static_cast<int>(std::min<long long>(left + 1, 50)));
    }
  }
  // Leftover group members (background children) die with the job. Once they
  // are gone the pipes reach EOF.
  kill_group(pid);
  while (fds[0].fd >= 0 || fds[1].fd >= 0) drain(100);
  result.duration_s = std::chrono::duration<double>(Clock::now() - start).count();
  strip_prefix_all(result.stdout_text, workdir + "/");
  strip_prefix_all(result.stderr_text, workdir + "/");

  if (timed_out) {
    result.exit = ExitKind::Timeout;
    result.exit_code = -1;
    result.signal = SIGKILL;
  } else if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
    result.exit = result.exit_code == 0 ? ExitKind::Ok : ExitKind::NonZero;
  } else if (WIFSIGNALED(status)) {
    result.exit = ExitKind::Killed;
    result.exit_code = -1;
    result.signal = WTERMSIG(status);
  }

  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(dir.work(), fs::directory_options::skip_permission_denied, ec);
       !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const auto rel = fs::relative(it->path(), dir.work(), ec).lexically_normal().string();
    if (std::find(inputs.begin(), inputs.end(), rel) != inputs.end()) continue;
    result.artifacts.push_back(rel);
  }
  std::sort(result.artifacts.begin(), result.artifacts.end());
  for (const auto& rel : result.artifacts) {
    const auto ext = fs::path(rel).extension().string();
    if (std::find(request.capture_extensions.begin(), request.capture_extensions.end(), ext) ==
        request.capture_extensions.end()) {
      continue;
    }
    std::ifstream in(dir.work() / rel, std::ios::binary);
    CapturedFile file{rel, std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {})};
    result.captured.push_back(std::move(file));
  }
  if (options_.keep_artifacts) {
    dir.keep();
    result.workdir = workdir;
  }
  return result;
}

}  // namespace ctir
