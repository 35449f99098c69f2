// Copyright 2026 The CoDoFuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "codofuzz/protocol_client.h"

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <cerrno>
#include <cstring>
#include <openssl/evp.h>

#include "codofuzz/error.h"
#include "codofuzz/linear_model.h"

namespace codofuzz {
namespace {

using Clock = std::chrono::steady_clock;

uint32_t ToLittleEndian(uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return __builtin_bswap32(v);
  }
  return v;
}

std::string Errno(std::string_view what) {
  return std::string(what) + ": " + std::strerror(errno);
}

// Buffered line reader/writer over a pair of file descriptors.
class FdLineStream {
 public:
  void Reset(int read_fd, int write_fd) {
    read_fd_ = read_fd;
    write_fd_ = write_fd;
    buffer_.clear();
  }

  void WriteLine(std::string_view line) {
    std::string data(line);
    data.push_back('\n');
    size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::send(write_fd_, data.data() + off, data.size() - off,
                               MSG_NOSIGNAL);
      if (n < 0 && errno == ENOTSOCK) {
        const ssize_t w =
            ::write(write_fd_, data.data() + off, data.size() - off);
        if (w < 0) {
          if (errno == EINTR) continue;
          throw Error(ErrorCode::kTransport, Errno("write"));
        }
        off += static_cast<size_t>(w);
        continue;
      }
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kTransport, Errno("send"));
      }
      off += static_cast<size_t>(n);
    }
  }

  std::optional<std::string> ReadLine(std::chrono::milliseconds timeout) {
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      const size_t nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - Clock::now());
      if (left.count() <= 0) return std::nullopt;
      pollfd pfd{read_fd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kTransport, Errno("poll"));
      }
      if (rc == 0) return std::nullopt;
      char chunk[65536];
      const ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::kTransport, Errno("read"));
      }
      if (n == 0) throw Error(ErrorCode::kTransport, "peer closed the stream");
      buffer_.append(chunk, static_cast<size_t>(n));
    }
  }

 private:
  int read_fd_ = -1;
  int write_fd_ = -1;
  std::string buffer_;
};

class TcpTransport : public LineTransport {
 public:
  TcpTransport(std::string host, int port)
      : host_(std::move(host)), port_(port) {
    Connect();
  }
  ~TcpTransport() override { Close(); }

  void WriteLine(std::string_view line) override { stream_.WriteLine(line); }
  std::optional<std::string> ReadLine(
      std::chrono::milliseconds timeout) override {
    return stream_.ReadLine(timeout);
  }
  void Reconnect() override {
    Close();
    Connect();
  }
  std::string Describe() const override {
    return "tcp:" + host_ + ":" + std::to_string(port_);
  }

 private:
  void Connect() {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const std::string port = std::to_string(port_);
    if (int rc = ::getaddrinfo(host_.c_str(), port.c_str(), &hints, &res);
        rc != 0) {
      throw Error(ErrorCode::kTransport,
                  "resolve " + host_ + ": " + ::gai_strerror(rc));
    }
    int fd = -1;
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
      if (fd < 0) continue;
      if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
      ::close(fd);
      fd = -1;
    }
    ::freeaddrinfo(res);
    if (fd < 0) throw Error(ErrorCode::kTransport, Errno("connect " + Describe()));
    fd_ = fd;
    stream_.Reset(fd_, fd_);
  }
  void Close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

  std::string host_;
  int port_;
  int fd_ = -1;
  FdLineStream stream_;
};

class CommandTransport : public LineTransport {
 public:
  explicit CommandTransport(std::string command) : command_(std::move(command)) {
    Spawn();
  }
  ~CommandTransport() override { Stop(); }

  void WriteLine(std::string_view line) override { stream_.WriteLine(line); }
  std::optional<std::string> ReadLine(
      std::chrono::milliseconds timeout) override {
    return stream_.ReadLine(timeout);
  }
  void Reconnect() override {
    Stop();
    Spawn();
  }
  std::string Describe() const override { return "cmd:" + command_; }

 private:
  void Spawn() {
    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 ||
        ::pipe2(from_child, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::kTransport, Errno("pipe"));
    }
    const pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorCode::kTransport, Errno("fork"));
    if (pid == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    pid_ = pid;
    write_fd_ = to_child[1];
    read_fd_ = from_child[0];
    stream_.Reset(read_fd_, write_fd_);
  }

  void Stop() {
    if (write_fd_ >= 0) ::close(write_fd_);
    if (read_fd_ >= 0) ::close(read_fd_);
    write_fd_ = read_fd_ = -1;
    if (pid_ > 0) {
      // Closing stdin asks the peer to exit; give it a moment, then kill.
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, nullptr, WNOHANG) == pid_) {
          pid_ = -1;
          return;
        }
        ::usleep(10000);
      }
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
    }
  }

  std::string command_;
  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
  FdLineStream stream_;
};

std::vector<double> ParseProbs(const nlohmann::json& probs) {
  if (!probs.is_array()) throw Error(ErrorCode::kTransport, "probs is not an array");
  std::vector<double> out;
  out.reserve(probs.size());
  for (const auto& v : probs) {
    if (!v.is_number()) throw Error(ErrorCode::kTransport, "non-numeric probability");
    // Values travel as binary32; widen exactly what was sent.
    out.push_back(static_cast<double>(v.get<double>()));
  }
  return out;
}

}  // namespace

std::string EncodePixels(std::span<const float> pixels) {
  std::string raw(pixels.size() * 4, '\0');
  for (size_t i = 0; i < pixels.size(); ++i) {
    const uint32_t le = ToLittleEndian(std::bit_cast<uint32_t>(pixels[i]));
    std::memcpy(raw.data() + 4 * i, &le, 4);
  }
  std::string out(4 * ((raw.size() + 2) / 3) + 1, '\0');
  const int n = ::EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                  reinterpret_cast<const unsigned char*>(raw.data()),
                                  static_cast<int>(raw.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

std::vector<float> DecodePixels(std::string_view base64) {
  if (base64.size() % 4 != 0) {
    throw Error(ErrorCode::kParse, "base64 length is not a multiple of 4");
  }
  std::string raw(base64.size() / 4 * 3, '\0');
  const int n = ::EVP_DecodeBlock(reinterpret_cast<unsigned char*>(raw.data()),
                                  reinterpret_cast<const unsigned char*>(base64.data()),
                                  static_cast<int>(base64.size()));
  if (n < 0) throw Error(ErrorCode::kParse, "invalid base64 payload");
  size_t len = static_cast<size_t>(n);
  // EVP_DecodeBlock counts padding as zero bytes.
  if (!base64.empty() && base64.back() == '=') --len;
  if (base64.size() >= 2 && base64[base64.size() - 2] == '=') --len;
  if (len % 4 != 0) {
    throw Error(ErrorCode::kParse, "payload is not a whole number of float32s");
  }
  std::vector<float> out(len / 4);
  for (size_t i = 0; i < out.size(); ++i) {
    uint32_t le;
    std::memcpy(&le, raw.data() + 4 * i, 4);
    out[i] = std::bit_cast<float>(ToLittleEndian(le));
  }
  return out;
}

std::unique_ptr<LineTransport> MakeTcpTransport(std::string host, int port) {
  return std::make_unique<TcpTransport>(std::move(host), port);
}

std::unique_ptr<LineTransport> MakeCommandTransport(std::string command) {
  ::signal(SIGPIPE, SIG_IGN);
  return std::make_unique<CommandTransport>(std::move(command));
}

template <typename Fn>
auto ProtocolClient::WithRetry(std::string_view what, Fn&& attempt) {
  std::string last;
  const int attempts = 1 + options_.retries;
  for (int i = 0; i < attempts; ++i) {
    try {
      if (i > 0) transport_->Reconnect();
      return attempt();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kTransport) throw;
      last = e.message();
    }
  }
  throw TransportError(std::string(what) + " via " + Describe() + " failed: " + last,
                       attempts);
}

ProtocolClient::ProtocolClient(std::unique_ptr<LineTransport> transport,
                               ProtocolOptions options)
    : transport_(std::move(transport)), options_(options) {
  WithRetry("handshake", [this] {
    Handshake();
    return 0;
  });
}

void ProtocolClient::Handshake() {
  early_.clear();
  transport_->WriteLine(nlohmann::json{{"op", "hello"}, {"version", 1}}.dump());
  const auto line = transport_->ReadLine(options_.timeout);
  if (!line) throw Error(ErrorCode::kTransport, "handshake timed out");
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(*line);
    if (reply.at("op") != "model") {
      throw Error(ErrorCode::kTransport, "unexpected handshake reply " + *line);
    }
    n_classes_ = reply.at("n_classes").get<int>();
    input_shape_ = reply.at("input_shape").get<ImageShape>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kTransport, std::string("bad handshake: ") + e.what());
  }
  if (n_classes_ < 2 || !input_shape_.valid()) {
    throw Error(ErrorCode::kTransport, "server declared an invalid model");
  }
}

nlohmann::json ProtocolClient::Exchange(const nlohmann::json& request,
                                        uint64_t id) {
  // Anything older than this request can never be claimed again.
  early_.erase(early_.begin(), early_.lower_bound(id));
  transport_->WriteLine(request.dump());
  const auto deadline = Clock::now() + options_.timeout;
  for (;;) {
    if (auto it = early_.find(id); it != early_.end()) {
      nlohmann::json reply = std::move(it->second);
      early_.erase(it);
      return reply;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0) {
      throw Error(ErrorCode::kTransport,
                  "request " + std::to_string(id) + " timed out");
    }
    const auto line = transport_->ReadLine(left);
    if (!line) continue;
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(*line);
      const uint64_t got = reply.at("id").get<uint64_t>();
      if (got >= id) early_[got] = std::move(reply);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kTransport,
                  std::string("malformed response: ") + e.what());
    }
  }
}

std::vector<double> ProtocolClient::Probabilities(const ImageTensor& image) {
  return WithRetry("predict", [&] {
    const uint64_t id = next_id_++;
    nlohmann::json request{{"op", "predict"},
                           {"id", id},
                           {"shape", image.shape()},
                           {"pixels", EncodePixels(image.pixels())}};
    const nlohmann::json reply = Exchange(request, id);
    if (reply.value("op", "") == "error") {
      throw Error(ErrorCode::kTransport,
                  "server error: " + reply.value("message", std::string("?")));
    }
    if (reply.value("op", "") != "result" || !reply.contains("probs")) {
      throw Error(ErrorCode::kTransport, "unexpected reply " + reply.dump());
    }
    return ParseProbs(reply["probs"]);
  });
}

std::vector<std::vector<double>> ProtocolClient::ProbabilitiesBatch(
    std::span<const ImageTensor> images) {
  if (images.empty()) return {};
  return WithRetry("predict batch", [&] {
    const uint64_t id = next_id_++;
    std::vector<float> all;
    all.reserve(images.size() * images[0].size());
    for (const ImageTensor& image : images) {
      all.insert(all.end(), image.pixels().begin(), image.pixels().end());
    }
    nlohmann::json request{{"op", "predict"},
                           {"id", id},
                           {"shape", images[0].shape()},
                           {"count", images.size()},
                           {"pixels_batch", EncodePixels(all)}};
    const nlohmann::json reply = Exchange(request, id);
    if (reply.value("op", "") == "error") {
      throw Error(ErrorCode::kTransport,
                  "server error: " + reply.value("message", std::string("?")));
    }
    const auto& probs = reply.value("probs", nlohmann::json());
    if (reply.value("op", "") != "result" || !probs.is_array() ||
        probs.size() != images.size()) {
      throw Error(ErrorCode::kTransport, "unexpected batch reply");
    }
    std::vector<std::vector<double>> out;
    out.reserve(probs.size());
    for (const auto& row : probs) out.push_back(ParseProbs(row));
    return out;
  });
}

std::unique_ptr<OracleClient> OpenOracle(std::string_view descriptor,
                                         ProtocolOptions options) {
  const size_t colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kConfig, "oracle descriptor needs a scheme: " +
                                        std::string(descriptor));
  }
  const std::string_view scheme = descriptor.substr(0, colon);
  const std::string rest(descriptor.substr(colon + 1));
  if (scheme == "builtin") {
    return std::make_unique<LinearSoftmaxModel>(LinearSoftmaxModel::Load(rest));
  }
  if (scheme == "tcp") {
    const size_t sep = rest.rfind(':');
    if (sep == std::string::npos) {
      throw Error(ErrorCode::kConfig, "tcp oracle needs host:port");
    }
    int port = 0;
    try {
      port = std::stoi(rest.substr(sep + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "bad port in " + rest);
    }
    return std::make_unique<ProtocolClient>(
        MakeTcpTransport(rest.substr(0, sep), port), options);
  }
  if (scheme == "cmd") {
    return std::make_unique<ProtocolClient>(MakeCommandTransport(rest), options);
  }
  throw Error(ErrorCode::kConfig, "unknown oracle scheme " + std::string(scheme));
}

}  // namespace codofuzz
