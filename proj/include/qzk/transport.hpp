// Message transports for protocol sessions: an in-process queue pair and a
// framed TCP stream. Both deliver whole frames, in order, exactly once.

#pragma once

#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "qzk/protocol.hpp"

namespace qzk {

class Transport {
public:
    virtual ~Transport() = default;
    virtual void send(const ProtocolMsg& msg) = 0;
    virtual ProtocolMsg recv() = 0;
};

// Two endpoints sharing in-memory queues; make_pair() wires them together.
class InProcTransport : public Transport {
public:
    static std::pair<std::unique_ptr<InProcTransport>, std::unique_ptr<InProcTransport>>
    make_pair();

    void send(const ProtocolMsg& msg) override;
    ProtocolMsg recv() override;

private:
    struct Queue {
        std::mutex mu;
        std::condition_variable cv;
        std::deque<std::vector<uint8_t>> frames;
        bool closed = false;
    };
    InProcTransport() = default;
    std::shared_ptr<Queue> out_;
    std::shared_ptr<Queue> in_;
};

// Blocking TCP endpoint carrying the wire frames of encode_msg.
class TcpTransport : public Transport {
public:
    // addr is "host:port".
    static std::unique_ptr<TcpTransport> listen_one(const std::string& addr);
    static std::unique_ptr<TcpTransport> connect(const std::string& addr);
    ~TcpTransport() override;

    void send(const ProtocolMsg& msg) override;
    ProtocolMsg recv() override;

private:
    explicit TcpTransport(int fd) : fd_(fd) {}
    int fd_ = -1;
};

}  // namespace qzk
