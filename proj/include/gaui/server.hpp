#ifndef GAUI_SERVER_HPP
#define GAUI_SERVER_HPP

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <list>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "gaui/protocol.hpp"

namespace gaui {

/// Line-framed TCP service: one DemoConnection per client, one thread each.
class DemoServer {
public:
    static constexpr std::size_t kMaxLineBytes = 1 << 20;

    explicit DemoServer(std::uint16_t port, const std::string& host = "127.0.0.1") {
        fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
        if (fd_ < 0) throw std::runtime_error(std::string("socket: ") + std::strerror(errno));
        int one = 1;
        ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
            ::close(fd_);
            throw std::runtime_error("bad host address: " + host);
        }
        if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(fd_, 16) < 0) {
            const std::string why = std::strerror(errno);
            ::close(fd_);
            throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
        }
        socklen_t len = sizeof addr;
        ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
        port_ = ntohs(addr.sin_port);
    }

    DemoServer(const DemoServer&) = delete;
    DemoServer& operator=(const DemoServer&) = delete;

    ~DemoServer() {
        stop();
        std::lock_guard lock(mu_);
        for (auto& t : workers_)
            if (t.joinable()) t.join();
        ::close(fd_);
    }

    std::uint16_t port() const { return port_; }

    /// Accept loop; returns after stop().
    void run() {
        while (!stopping_) {
            pollfd p{fd_, POLLIN, 0};
            if (::poll(&p, 1, 100) <= 0) continue;
            const int client = ::accept(fd_, nullptr, nullptr);
            if (client < 0) continue;
            std::lock_guard lock(mu_);
            workers_.emplace_back([this, client] { serve(client); });
        }
    }

    void stop() { stopping_ = true; }

private:
    static bool send_all(int fd, const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
            if (n <= 0) return false;
            off += static_cast<std::size_t>(n);
        }
        return true;
    }

    void serve(int fd) {
        DemoConnection conn;
        std::string buf;
        char chunk[4096];
        bool open = true;
        while (open && !stopping_) {
            pollfd p{fd, POLLIN, 0};
            if (::poll(&p, 1, 100) <= 0) continue;
            const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
            if (n <= 0) break;
            buf.append(chunk, static_cast<std::size_t>(n));
            std::size_t nl;
            while (open && (nl = buf.find('\n')) != std::string::npos) {
                std::string line = buf.substr(0, nl);
                buf.erase(0, nl + 1);
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty()) continue;
                std::string reply;
                for (const auto& frame : conn.handle(line)) reply += frame.dump() + "\n";
                open = send_all(fd, reply);
            }
            if (buf.size() > kMaxLineBytes) {
                send_all(fd, DemoConnection::error("frame too long").dump() + "\n");
                break;
            }
        }
        ::close(fd);
    }

    int fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::mutex mu_;
    std::list<std::thread> workers_;
};

} // namespace gaui

#endif // GAUI_SERVER_HPP
