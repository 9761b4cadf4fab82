#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "bifeedback/teacher.hpp"

namespace bifeedback::protocol {

// Wire messages exchanged with a remote teacher. Every message is one JSON
// object on one line (UTF-8, '\n' terminated on the wire):
//
//   {"type":"emit","ctx":{"heading":H,"distance":D},"episode":E,"t":T}
//   {"type":"token","name":N}
//   {"type":"feedback","signal":"positive"|"negative","ctx":{...},"token":N}
//   {"type":"ack"}
//   {"type":"shutdown"}
//
// Field order is insignificant; unknown extra fields are ignored.

struct EmitRequest {
  TeacherContext ctx;
  std::int64_t episode = 0;
  std::int64_t t = 0;
  friend bool operator==(const EmitRequest&, const EmitRequest&) = default;
};

struct TokenResponse {
  Token token = Token::GoForward;
  friend bool operator==(const TokenResponse&, const TokenResponse&) = default;
};

struct FeedbackRequest {
  FeedbackSignal signal = FeedbackSignal::Positive;
  TeacherContext ctx;
  Token token = Token::GoForward;
  friend bool operator==(const FeedbackRequest&, const FeedbackRequest&) = default;
};

struct Ack {
  friend bool operator==(const Ack&, const Ack&) = default;
};

struct Shutdown {
  friend bool operator==(const Shutdown&, const Shutdown&) = default;
};

using Message = std::variant<EmitRequest, TokenResponse, FeedbackRequest, Ack, Shutdown>;

// Serializes without the trailing newline.
std::string encode(const Message& msg);

// Throws ProtocolError on malformed JSON, a missing or mistyped field, an
// unknown message type, or a token name outside the vocabulary.
Message decode(std::string_view line);

}  // namespace bifeedback::protocol
