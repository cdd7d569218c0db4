#include "cilyric/external_scorer.h"

#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "cilyric/error.h"

namespace cilyric {

using nlohmann::json;

namespace {

[[noreturn]] void Fail(const std::string& what, const std::string& request, const std::string& reply) {
  throw Error(ErrorCategory::kScorer, what + "; request=" + request + " reply=" + reply);
}

}  // namespace

ExternalScorer::ExternalScorer(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

ExternalScorer::ExternalScorer(ExternalScorer&& other) noexcept
    : host_(std::move(other.host_)),
      port_(other.port_),
      timeout_(other.timeout_),
      fd_(other.fd_),
      next_id_(other.next_id_),
      buffer_(std::move(other.buffer_)) {
  other.fd_ = -1;
}

ExternalScorer::~ExternalScorer() { Close(); }

ExternalScorer ExternalScorer::FromAddress(std::string_view address, std::chrono::milliseconds timeout) {
  const auto colon = address.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == address.size()) {
    throw Error(ErrorCategory::kConfig, "scorer address must be host:port, got '" + std::string(address) + "'");
  }
  const std::string port_text(address.substr(colon + 1));
  char* end = nullptr;
  const long port = std::strtol(port_text.c_str(), &end, 10);
  if (*end != '\0' || port <= 0 || port > 65535) {
    throw Error(ErrorCategory::kConfig, "invalid scorer port '" + port_text + "'");
  }
  return ExternalScorer(std::string(address.substr(0, colon)), static_cast<std::uint16_t>(port), timeout);
}

void ExternalScorer::Close() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
  buffer_.clear();
}

void ExternalScorer::Connect() {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  const std::string port = std::to_string(port_);
  if (const int rc = ::getaddrinfo(host_.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw Error(ErrorCategory::kScorer, "cannot resolve scorer " + host_ + ": " + ::gai_strerror(rc));
  }
  for (addrinfo* a = found; a != nullptr; a = a->ai_next) {
    const int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
      break;
    }
    ::close(fd);
  }
  ::freeaddrinfo(found);
  if (fd_ < 0) {
    throw Error(ErrorCategory::kScorer, "cannot connect to scorer " + host_ + ":" + port + ": " + std::strerror(errno));
  }
}

std::string ExternalScorer::ReadLine(const std::string& request) {
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      const std::string partial = buffer_;
      Close();
      Fail("scorer timed out after " + std::to_string(timeout_.count()) + " ms", request, partial);
    }
    pollfd pfd{fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) continue;
    char chunk[4096];
    const ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
    if (n <= 0) {
      const std::string partial = buffer_;
      Close();
      Fail("scorer closed the connection", request, partial);
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

ScorerVerdict ExternalScorer::Score(std::string_view history, std::string_view candidate) {
  if (fd_ < 0) Connect();
  const std::int64_t id = next_id_++;
  const std::string request =
      json{{"id", id}, {"history", std::string(history)}, {"candidate", std::string(candidate)}}.dump() + "\n";
  std::size_t sent = 0;
  while (sent < request.size()) {
    const ssize_t n = ::send(fd_, request.data() + sent, request.size() - sent, MSG_NOSIGNAL);
    if (n <= 0) {
      Close();
      Fail(std::string("send failed: ") + std::strerror(errno), request, "");
    }
    sent += static_cast<std::size_t>(n);
  }
  const std::string reply = ReadLine(request);
  json obj;
  try {
    obj = json::parse(reply);
  } catch (const json::exception&) {
    Close();  // the stream can no longer be trusted to stay in step
    Fail("scorer reply is not JSON", request, reply);
  }
  if (!obj.is_object() || !obj.contains("id") || obj["id"] != id) {
    Close();
    Fail("scorer reply id mismatch", request, reply);
  }
  if (obj.contains("error")) Fail("scorer reported an error", request, reply);
  const auto it = obj.find("probs");
  if (it == obj.end() || !it->is_array() || it->size() != kClassCount) {
    Fail("scorer reply lacks a 4-element 'probs' array", request, reply);
  }
  ScorerVerdict verdict;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (!(*it)[c].is_number()) Fail("scorer probs must be numbers", request, reply);
    verdict.probs[c] = (*it)[c].get<double>();
  }
  if (!verdict.IsValid()) Fail("scorer probs are not a distribution", request, reply);
  return verdict;
}

}  // namespace cilyric
