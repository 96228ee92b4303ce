#pragma once

#include "kbits/bytes.hpp"
#include "kbits/frame.hpp"

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <utility>

namespace kbits {

// Ordered reliable duplex byte stream; everything the stations need.
class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const Bytes& data) = 0;
    // exactly n bytes or TimeoutError/ProtocolError (peer closed)
    virtual Bytes recv_exact(std::size_t n, std::chrono::milliseconds timeout) = 0;
    virtual void close() = 0;
};

// In-memory pair for tests and in-process simulation.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> make_loopback_pair();

// Records every byte sent through it (one direction), for the tap.
class RecordingTransport final : public Transport {
public:
    explicit RecordingTransport(std::unique_ptr<Transport> inner)
        : inner_(std::move(inner)) {}
    void send(const Bytes& data) override {
        {
            std::lock_guard<std::mutex> lock(mu_);
            sent_.insert(sent_.end(), data.begin(), data.end());
        }
        inner_->send(data);
    }
    Bytes recv_exact(std::size_t n, std::chrono::milliseconds timeout) override {
        return inner_->recv_exact(n, timeout);
    }
    void close() override { inner_->close(); }
    Bytes sent_bytes() const {
        std::lock_guard<std::mutex> lock(mu_);
        return sent_;
    }

private:
    std::unique_ptr<Transport> inner_;
    mutable std::mutex mu_;
    Bytes sent_;
};

// TCP client connection / listening socket (POSIX).
std::unique_ptr<Transport> tcp_connect(const std::string& host, std::uint16_t port,
                                       std::chrono::milliseconds timeout);

class TcpListener {
public:
    TcpListener(const std::string& bind_host, std::uint16_t port);
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;
    std::unique_ptr<Transport> accept(std::chrono::milliseconds timeout);
    std::uint16_t port() const { return port_; }

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

// frame I/O over any transport
void write_frame(Transport& t, const Frame& frame);
Frame read_frame(Transport& t, std::chrono::milliseconds timeout);

}  // namespace kbits
