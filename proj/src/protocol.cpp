#include "bifeedback/protocol.hpp"

#include <json.hpp>

#include "bifeedback/errors.hpp"

namespace bifeedback::protocol {

namespace {

using nlohmann::json;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json context_json(const TeacherContext& ctx) {
  return {{"heading", to_string(ctx.rel_goal.heading)},
          {"distance", to_string(ctx.rel_goal.distance)}};
}

const json& field(const json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) throw ProtocolError(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_string()) throw ProtocolError(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

std::int64_t int_field(const json& obj, const char* name) {
  const json& v = field(obj, name);
  if (!v.is_number_integer()) {
    throw ProtocolError(std::string("field '") + name + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

TeacherContext parse_context(const json& obj) {
  const json& ctx = field(obj, "ctx");
  if (!ctx.is_object()) throw ProtocolError("field 'ctx' must be an object");
  return {{heading_from_string(string_field(ctx, "heading")),
           distance_from_string(string_field(ctx, "distance"))}};
}

Token parse_token(const std::string& name) {
  auto token = token_from_string(name);
  if (!token) throw ProtocolError("token '" + name + "' is not in the vocabulary");
  return *token;
}

}  // namespace

std::string encode(const Message& msg) {
  json out = std::visit(
      Overloaded{
          [](const EmitRequest& m) -> json {
            return {{"type", "emit"},
                    {"ctx", context_json(m.ctx)},
                    {"episode", m.episode},
                    {"t", m.t}};
          },
          [](const TokenResponse& m) -> json {
            return {{"type", "token"}, {"name", to_string(m.token)}};
          },
          [](const FeedbackRequest& m) -> json {
            return {{"type", "feedback"},
                    {"signal", to_string(m.signal)},
                    {"ctx", context_json(m.ctx)},
                    {"token", to_string(m.token)}};
          },
          [](const Ack&) -> json { return {{"type", "ack"}}; },
          [](const Shutdown&) -> json { return {{"type", "shutdown"}}; },
      },
      msg);
  return out.dump();
}

Message decode(std::string_view line) {
  json obj = json::parse(line.begin(), line.end(), nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) throw ProtocolError("malformed JSON");
  if (!obj.is_object()) throw ProtocolError("message must be a JSON object");

  const std::string type = string_field(obj, "type");
  if (type == "emit") {
    const std::int64_t episode = obj.contains("episode") ? int_field(obj, "episode") : 0;
    return EmitRequest{parse_context(obj), episode, int_field(obj, "t")};
  }
  if (type == "token") return TokenResponse{parse_token(string_field(obj, "name"))};
  if (type == "feedback") {
    const std::string signal_name = string_field(obj, "signal");
    auto signal = signal_from_string(signal_name);
    if (!signal) throw ProtocolError("unknown feedback signal '" + signal_name + "'");
    return FeedbackRequest{*signal, parse_context(obj), parse_token(string_field(obj, "token"))};
  }
  if (type == "ack") return Ack{};
  if (type == "shutdown") return Shutdown{};
  throw ProtocolError("unknown message type '" + type + "'");
}

}  // namespace bifeedback::protocol
