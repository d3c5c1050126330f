#include "dse/subprocess.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <utility>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dse/errors.hpp"

namespace dse {
namespace {

class Fd
{
  public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
    Fd& operator=(Fd&& o) noexcept
    {
        reset();
        fd_ = std::exchange(o.fd_, -1);
        return *this;
    }
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    void reset()
    {
        if (fd_ >= 0)
            ::close(fd_);
        fd_ = -1;
    }

  private:
    int fd_ = -1;
};

struct Pipe
{
    Fd read;
    Fd write;
};

Pipe make_pipe()
{
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0)
        throw EvaluationError(std::string("pipe failed: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

}  // namespace

ProcessResult run_process(const std::string& command, const std::string& working_dir, const std::string& input,
                          double timeout_seconds)
{
    // A child that exits without draining stdin must not kill us.
    static const bool sigpipe_ignored = (std::signal(SIGPIPE, SIG_IGN), true);
    (void)sigpipe_ignored;

    Pipe in = make_pipe();
    Pipe out = make_pipe();
    Pipe err = make_pipe();

    pid_t pid = ::fork();
    if (pid < 0)
        throw EvaluationError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in.read.get(), STDIN_FILENO);
        ::dup2(out.write.get(), STDOUT_FILENO);
        ::dup2(err.write.get(), STDERR_FILENO);
        if (!working_dir.empty() && ::chdir(working_dir.c_str()) != 0)
            ::_exit(126);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    in.read.reset();
    out.write.reset();
    err.write.reset();
    ::fcntl(in.write.get(), F_SETFL, O_NONBLOCK);

    ProcessResult result;
    std::size_t written = 0;
    if (input.empty())
        in.write.reset();

    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
    char buf[65536];
    while (out.read.get() >= 0 || err.read.get() >= 0) {
        pollfd fds[3];
        nfds_t count = 0;
        auto watch = [&](const Fd& fd, short events) {
            if (fd.get() >= 0)
                fds[count++] = {fd.get(), events, 0};
        };
        watch(out.read, POLLIN);
        watch(err.read, POLLIN);
        watch(in.write, POLLOUT);

        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        int ready = ::poll(fds, count, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (ready < 0 && errno != EINTR)
            break;

        for (nfds_t i = 0; i < count; ++i) {
            if (fds[i].revents == 0)
                continue;
            if (fds[i].fd == in.write.get()) {
                if (fds[i].revents & (POLLERR | POLLHUP)) {
                    in.write.reset();
                    continue;
                }
                ssize_t n = ::write(in.write.get(), input.data() + written, input.size() - written);
                if (n > 0)
                    written += static_cast<std::size_t>(n);
                if ((n < 0 && errno != EAGAIN) || written == input.size())
                    in.write.reset();
                continue;
            }
            Fd& source = fds[i].fd == out.read.get() ? out.read : err.read;
            std::string& sink = fds[i].fd == out.read.get() ? result.out : result.err;
            ssize_t n = ::read(source.get(), buf, sizeof(buf));
            if (n > 0)
                sink.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || errno != EAGAIN)
                source.reset();
        }
    }
    in.write.reset();

    if (result.timed_out)
        ::kill(pid, SIGKILL);
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status))
        result.exit_code = WEXITSTATUS(status);
    else if (WIFSIGNALED(status))
        result.exit_code = 128 + WTERMSIG(status);
    return result;
}

}  // namespace dse
