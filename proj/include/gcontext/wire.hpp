#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace gcontext::wire {

/// Coordinator/worker protocol version carried in HELLO.
inline constexpr int protocol_version = 1;

/// Upper bound on a frame body; larger frames are rejected as corrupt.
inline constexpr std::uint32_t max_body_size = 1u << 30;

enum class FrameType : std::uint8_t {
  hello = 0,
  task = 1,
  result = 2,
  error = 3,
  shutdown = 4,
};

std::string_view to_string(FrameType type);

struct Frame {
  FrameType type = FrameType::hello;
  nlohmann::json body;
};

/// Sorted keys, UTF-8, no insignificant whitespace.
std::string canonical_json(const nlohmann::json& value);

/// Frame layout: 4-byte big-endian body length, 1 type byte, canonical
/// JSON body. The length counts body bytes only.
std::string encode_frame(FrameType type, const nlohmann::json& body);

/// Decodes one frame from the front of `buffer`. Returns nullopt when the
/// buffer holds an incomplete frame; throws ProtocolError on bad input.
std::optional<Frame> decode_frame(std::string_view buffer, std::size_t& consumed);

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Blocking frame I/O on a connected stream socket.
void send_frame(int fd, FrameType type, const nlohmann::json& body);

/// Returns nullopt on orderly EOF before any byte of the frame. With a
/// timeout, throws ProtocolError if no complete frame arrives in time.
std::optional<Frame> receive_frame(int fd, std::optional<std::chrono::milliseconds> timeout = std::nullopt);

}  // namespace gcontext::wire
