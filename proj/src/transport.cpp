#include "kbits/transport.hpp"

#include "kbits/errors.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <condition_variable>
#include <cstring>
#include <deque>
#include <stdexcept>

namespace kbits {

namespace {

// one direction of a loopback link
struct Pipe {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<std::uint8_t> data;
    bool closed = false;

    void push(const Bytes& bytes) {
        {
            std::lock_guard<std::mutex> lock(mu);
            if (closed) throw ProtocolError("loopback: send on closed pipe");
            data.insert(data.end(), bytes.begin(), bytes.end());
        }
        cv.notify_all();
    }

    Bytes pop(std::size_t n, std::chrono::milliseconds timeout) {
        std::unique_lock<std::mutex> lock(mu);
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (data.size() < n) {
            if (closed) throw ProtocolError("loopback: peer closed");
            if (cv.wait_until(lock, deadline) == std::cv_status::timeout && data.size() < n)
                throw TimeoutError("loopback: receive timed out");
        }
        Bytes out(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
        data.erase(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
        return out;
    }

    void close() {
        {
            std::lock_guard<std::mutex> lock(mu);
            closed = true;
        }
        cv.notify_all();
    }
};

class LoopbackTransport final : public Transport {
public:
    LoopbackTransport(std::shared_ptr<Pipe> out, std::shared_ptr<Pipe> in)
        : out_(std::move(out)), in_(std::move(in)) {}
    ~LoopbackTransport() override { close(); }

    void send(const Bytes& data) override { out_->push(data); }
    Bytes recv_exact(std::size_t n, std::chrono::milliseconds timeout) override {
        return in_->pop(n, timeout);
    }
    void close() override {
        out_->close();
        in_->close();
    }

private:
    std::shared_ptr<Pipe> out_;
    std::shared_ptr<Pipe> in_;
};

class TcpTransport final : public Transport {
public:
    explicit TcpTransport(int fd) : fd_(fd) {
        const int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    }
    ~TcpTransport() override { close(); }

    void send(const Bytes& data) override {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::send(fd_, data.data() + off, data.size() - off, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("tcp send: ") + std::strerror(errno));
            }
            off += static_cast<std::size_t>(n);
        }
    }

    Bytes recv_exact(std::size_t n, std::chrono::milliseconds timeout) override {
        Bytes out(n);
        std::size_t off = 0;
        const auto deadline = std::chrono::steady_clock::now() + timeout;
        while (off < n) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw TimeoutError("tcp: receive timed out");
            struct pollfd pfd {fd_, POLLIN, 0};
            const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (pr < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("tcp poll: ") + std::strerror(errno));
            }
            if (pr == 0) throw TimeoutError("tcp: receive timed out");
            const ssize_t r = ::recv(fd_, out.data() + off, n - off, 0);
            if (r < 0) {
                if (errno == EINTR) continue;
                throw ProtocolError(std::string("tcp recv: ") + std::strerror(errno));
            }
            if (r == 0) throw ProtocolError("tcp: peer closed");
            off += static_cast<std::size_t>(r);
        }
        return out;
    }

    void close() override {
        if (fd_ >= 0) {
            ::shutdown(fd_, SHUT_RDWR);
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_;
};

}  // namespace

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair() {
    auto ab = std::make_shared<Pipe>();
    auto ba = std::make_shared<Pipe>();
    return {std::make_unique<LoopbackTransport>(ab, ba),
            std::make_unique<LoopbackTransport>(ba, ab)};
}

std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port,
                                       std::chrono::milliseconds timeout) {
    struct addrinfo hints {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    struct addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr)
        throw ProtocolError("tcp connect: cannot resolve " + host);

    int fd = -1;
    for (struct addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        // non-blocking connect so the timeout applies
        const int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            struct pollfd pfd {fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(timeout.count())) == 1 ? 0 : -1;
            if (rc == 0) {
                int err = 0;
                socklen_t len = sizeof err;
                ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                if (err != 0) rc = -1;
            }
        }
        if (rc == 0) {
            ::fcntl(fd, F_SETFL, flags);
            break;
        }
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw ProtocolError("tcp connect: no reachable address for " + host);
    return std::make_unique<TcpTransport>(fd);
}

TcpListener::TcpListener(const std::string& bind_host, std::uint16_t port) {
    struct addrinfo hints {};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    struct addrinfo* res = nullptr;
    const std::string service = std::to_string(port);
    if (::getaddrinfo(bind_host.empty() ? nullptr : bind_host.c_str(), service.c_str(), &hints,
                      &res) != 0 ||
        res == nullptr)
        throw ProtocolError("tcp listen: cannot resolve " + bind_host);

    for (struct addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
        fd_ = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd_ < 0) continue;
        const int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        if (::bind(fd_, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd_, 8) == 0) break;
        ::close(fd_);
        fd_ = -1;
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) throw ProtocolError("tcp listen: cannot bind port " + service);

    struct sockaddr_storage addr {};
    socklen_t len = sizeof addr;
    if (::getsockname(fd_, reinterpret_cast<struct sockaddr*>(&addr), &len) == 0) {
        if (addr.ss_family == AF_INET)
            port_ = ntohs(reinterpret_cast<struct sockaddr_in*>(&addr)->sin_port);
        else if (addr.ss_family == AF_INET6)
            port_ = ntohs(reinterpret_cast<struct sockaddr_in6*>(&addr)->sin6_port);
    }
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

std::unique_ptr<Transport> TcpListener::accept(std::chrono::milliseconds timeout) {
    struct pollfd pfd {fd_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (pr < 0) throw ProtocolError(std::string("tcp accept poll: ") + std::strerror(errno));
    if (pr == 0) throw TimeoutError("tcp accept: timed out");
    const int fd = ::accept(fd_, nullptr, nullptr);
    if (fd < 0) throw ProtocolError(std::string("tcp accept: ") + std::strerror(errno));
    return std::make_unique<TcpTransport>(fd);
}

void write_frame(Transport& t, const Frame& frame) { t.send(encode_frame(frame)); }

Frame read_frame(Transport& t, std::chrono::milliseconds timeout) {
    const Bytes header = t.recv_exact(kFrameHeaderSize, timeout);
    if (header[0] != 'K' || header[1] != 'B' || header[2] != 'T' || header[3] != 'S')
        throw MalformedFrame("frame: bad magic on stream");
    const std::uint32_t payload_len = get_u32be(header.data() + 14);
    if (payload_len > kMaxPayload) throw MalformedFrame("frame: payload length exceeds cap");
    const Bytes rest = t.recv_exact(payload_len + 4, timeout);
    Bytes whole;
    whole.reserve(header.size() + rest.size());
    whole.insert(whole.end(), header.begin(), header.end());
    whole.insert(whole.end(), rest.begin(), rest.end());
    return decode_frame(whole);
}

}  // namespace kbits
