#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "cilyric/fluency.h"

namespace cilyric {

/// Client for a scorer process speaking newline-delimited JSON over TCP:
///   request  {"id": int, "history": str, "candidate": str}
///   response {"id": int, "probs": [4 floats]}
/// Requests on one connection are serialized. Timeouts and protocol
/// violations throw Error(kScorer) carrying the raw request and reply.
class ExternalScorer final : public Scorer {
 public:
  ExternalScorer(std::string host, std::uint16_t port,
                 std::chrono::milliseconds timeout = std::chrono::seconds(5));
  ~ExternalScorer() override;

  ExternalScorer(const ExternalScorer&) = delete;
  ExternalScorer& operator=(const ExternalScorer&) = delete;
  ExternalScorer(ExternalScorer&& other) noexcept;
  ExternalScorer& operator=(ExternalScorer&&) = delete;

  /// Parses "host:port". Throws Error(kConfig) when malformed.
  static ExternalScorer FromAddress(std::string_view address,
                                    std::chrono::milliseconds timeout = std::chrono::seconds(5));

  ScorerVerdict Score(std::string_view history, std::string_view candidate) override;

 private:
  void Connect();
  void Close();
  std::string ReadLine(const std::string& request);

  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
  int fd_ = -1;
  std::int64_t next_id_ = 0;
  std::string buffer_;
};

}  // namespace cilyric
