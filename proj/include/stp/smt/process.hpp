#pragma once

#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <fcntl.h>
#include <string>
#include <vector>

namespace stp::smt {

struct ProcessResult {
  bool started = false;
  bool timed_out = false;
  int exit_code = -1;  // -1 when killed by a signal
  std::string out;
  std::string err;
};

// Runs `/bin/sh -c command`, feeding `input` on stdin. The child gets its own
// process group so that a timeout kills everything it spawned.
inline ProcessResult run_process(const std::string& command, const std::string& input,
                                 std::chrono::milliseconds timeout) {
  ProcessResult r;
  int in_p[2], out_p[2], err_p[2];
  if (pipe2(in_p, O_CLOEXEC) != 0) return r;
  if (pipe2(out_p, O_CLOEXEC) != 0) {
    close(in_p[0]);
    close(in_p[1]);
    return r;
  }
  if (pipe2(err_p, O_CLOEXEC) != 0) {
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1]}) close(fd);
    return r;
  }
  pid_t pid = fork();
  if (pid < 0) {
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1], err_p[0], err_p[1]}) close(fd);
    return r;
  }
  if (pid == 0) {
    setpgid(0, 0);
    dup2(in_p[0], 0);
    dup2(out_p[1], 1);
    dup2(err_p[1], 2);
    for (int fd : {in_p[0], in_p[1], out_p[0], out_p[1], err_p[0], err_p[1]}) close(fd);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  r.started = true;
  close(in_p[0]);
  close(out_p[1]);
  close(err_p[1]);
  // a solver that exits without reading stdin must not kill us; set once, process-wide
  static const bool sigpipe_ignored = [] {
    signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)sigpipe_ignored;
  fcntl(in_p[1], F_SETFL, O_NONBLOCK);

  std::size_t written = 0;
  int wfd = in_p[1];
  if (input.empty()) {
    close(wfd);
    wfd = -1;
  }
  int ofd = out_p[0], efd = err_p[0];
  auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[4096];
  while (ofd >= 0 || efd >= 0) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      r.timed_out = true;
      break;
    }
    pollfd fds[3];
    int n = 0;
    if (ofd >= 0) fds[n++] = {ofd, POLLIN, 0};
    if (efd >= 0) fds[n++] = {efd, POLLIN, 0};
    if (wfd >= 0) fds[n++] = {wfd, POLLOUT, 0};
    int k = poll(fds, static_cast<nfds_t>(n), static_cast<int>(std::min<long long>(left.count(), 100)));
    if (k < 0 && errno != EINTR) break;
    for (int q = 0; q < n; ++q) {
      if (!fds[q].revents) continue;
      int fd = fds[q].fd;
      if (fd == wfd) {
        ssize_t w = write(wfd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) written = input.size();
        if (written >= input.size()) {
          close(wfd);
          wfd = -1;
        }
        continue;
      }
      ssize_t got = read(fd, buf, sizeof buf);
      if (got > 0) {
        (fd == ofd ? r.out : r.err).append(buf, static_cast<std::size_t>(got));
      } else if (got == 0 || errno != EAGAIN) {
        close(fd);
        (fd == ofd ? ofd : efd) = -1;
      }
    }
  }
  if (wfd >= 0) close(wfd);
  if (ofd >= 0) close(ofd);
  if (efd >= 0) close(efd);
  if (r.timed_out) kill(-pid, SIGKILL);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
  return r;
}

}  // namespace stp::smt
