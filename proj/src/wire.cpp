#include "gcontext/wire.hpp"

#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace gcontext::wire {

using nlohmann::json;

std::string_view to_string(FrameType type) {
  switch (type) {
    case FrameType::hello: return "HELLO";
    case FrameType::task: return "TASK";
    case FrameType::result: return "RESULT";
    case FrameType::error: return "ERROR";
    case FrameType::shutdown: return "SHUTDOWN";
  }
  return "?";
}

std::string canonical_json(const json& value) {
  // nlohmann::json objects are std::map backed, so keys serialise sorted.
  return value.dump(-1, ' ', false, json::error_handler_t::strict);
}

std::string encode_frame(FrameType type, const json& body) {
  auto payload = canonical_json(body);
  if (payload.size() > max_body_size) throw ProtocolError("frame body too large");
  auto n = static_cast<std::uint32_t>(payload.size());
  std::string out;
  out.reserve(payload.size() + 5);
  out.push_back(static_cast<char>((n >> 24) & 0xff));
  out.push_back(static_cast<char>((n >> 16) & 0xff));
  out.push_back(static_cast<char>((n >> 8) & 0xff));
  out.push_back(static_cast<char>(n & 0xff));
  out.push_back(static_cast<char>(type));
  out += payload;
  return out;
}

namespace {

std::uint32_t read_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

FrameType checked_type(unsigned char t) {
  if (t > static_cast<unsigned char>(FrameType::shutdown))
    throw ProtocolError("unknown frame type " + std::to_string(t));
  return static_cast<FrameType>(t);
}

json parse_body(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ProtocolError(std::string("malformed frame body: ") + e.what());
  }
}

// Reads exactly n bytes. Returns bytes read before EOF (n on success).
std::size_t read_exact(int fd, char* out, std::size_t n, std::optional<std::chrono::steady_clock::time_point> deadline) {
  std::size_t got = 0;
  while (got < n) {
    if (deadline) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw ProtocolError("timed out waiting for frame");
      pollfd p{fd, POLLIN, 0};
      int rc = ::poll(&p, 1, static_cast<int>(left.count()));
      if (rc < 0 && errno == EINTR) continue;
      if (rc < 0) throw ProtocolError(std::string("poll: ") + std::strerror(errno));
      if (rc == 0) throw ProtocolError("timed out waiting for frame");
    }
    ssize_t r = ::recv(fd, out + got, n - got, 0);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) {
      if (errno == ECONNRESET) return got;
      throw ProtocolError(std::string("recv: ") + std::strerror(errno));
    }
    if (r == 0) return got;
    got += static_cast<std::size_t>(r);
  }
  return got;
}

}  // namespace

std::optional<Frame> decode_frame(std::string_view buffer, std::size_t& consumed) {
  consumed = 0;
  if (buffer.size() < 5) return std::nullopt;
  auto* p = reinterpret_cast<const unsigned char*>(buffer.data());
  auto n = read_be32(p);
  if (n > max_body_size) throw ProtocolError("frame body too large");
  auto type = checked_type(p[4]);
  if (buffer.size() < 5 + std::size_t{n}) return std::nullopt;
  Frame f{type, parse_body(buffer.substr(5, n))};
  consumed = 5 + std::size_t{n};
  return f;
}

void send_frame(int fd, FrameType type, const json& body) {
  auto bytes = encode_frame(type, body);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    ssize_t r = ::send(fd, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) throw ProtocolError(std::string("send: ") + std::strerror(errno));
    sent += static_cast<std::size_t>(r);
  }
}

std::optional<Frame> receive_frame(int fd, std::optional<std::chrono::milliseconds> timeout) {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (timeout) deadline = std::chrono::steady_clock::now() + *timeout;
  unsigned char header[5];
  auto got = read_exact(fd, reinterpret_cast<char*>(header), 5, deadline);
  if (got == 0) return std::nullopt;
  if (got < 5) throw ProtocolError("connection closed inside frame header");
  auto n = read_be32(header);
  if (n > max_body_size) throw ProtocolError("frame body too large");
  auto type = checked_type(header[4]);
  std::string body(n, '\0');
  if (read_exact(fd, body.data(), n, deadline) < n) throw ProtocolError("connection closed inside frame body");
  return Frame{type, parse_body(body)};
}

}  // namespace gcontext::wire
