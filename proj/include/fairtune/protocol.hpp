#ifndef FAIRTUNE_PROTOCOL_HPP
#define FAIRTUNE_PROTOCOL_HPP

// Evaluator wire protocol: one JSON object per line.
//
//   bridge -> engine  {"hello":{"protocol":1,"mode":"stub"|"real"}}   (once, on startup)
//   engine -> bridge  {"id":..,"positive_prompt":..,"negative_prompt":..,
//                      "guidance_scale":..,"inference_steps":..,"image_count":..,"seed":..}
//   bridge -> engine  {"id":..,"records":[{"quality":..,"gender":..,"ethnicity":..,
//                      "cpu_kwh":..,"gpu_kwh":..,"duration_s":..}, ...]}
//                  or {"id":..,"error":".."}

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fairtune/error.hpp"
#include "fairtune/objectives.hpp"

namespace fairtune {

inline constexpr int kProtocolVersion = 1;

struct EvaluationRequest {
    std::int64_t request_id = 0;
    std::string positive_prompt;
    std::string negative_prompt;
    double guidance_scale = 7.0;
    int inference_steps = 50;
    int image_count = 20;
    std::uint64_t seed = 0;  // < 2^53 so every JSON consumer reads it exactly

    friend bool operator==(EvaluationRequest const&, EvaluationRequest const&) = default;
};

struct EvaluationResponse {
    std::int64_t request_id = 0;
    std::vector<ImageRecord> records;
    std::optional<std::string> error;

    bool ok() const { return !error.has_value(); }
    friend bool operator==(EvaluationResponse const&, EvaluationResponse const&) = default;
};

struct Hello {
    int protocol = kProtocolVersion;
    std::string mode = "stub";

    friend bool operator==(Hello const&, Hello const&) = default;
};

inline constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

namespace protocol {

using nlohmann::json;

inline json record_to_json(ImageRecord const& r) {
    return json{{"quality", r.quality},
                {"gender", std::string(to_string(r.gender))},
                {"ethnicity", std::string(to_string(r.ethnicity))},
                {"cpu_kwh", r.cpu_kwh},
                {"gpu_kwh", r.gpu_kwh},
                {"duration_s", r.duration_s}};
}

namespace detail {

template <typename T>
T field(json const& j, char const* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ProtocolError(std::string("missing key '") + key + "'");
    try {
        if constexpr (std::is_floating_point_v<T>) {
            if (!it->is_number()) throw ProtocolError(std::string("key '") + key + "' is not a number");
        } else if constexpr (std::is_integral_v<T>) {
            if (!it->is_number_integer()) throw ProtocolError(std::string("key '") + key + "' is not an integer");
        } else {
            if (!it->is_string()) throw ProtocolError(std::string("key '") + key + "' is not a string");
        }
        return it->get<T>();
    } catch (json::exception const& e) {
        throw ProtocolError(std::string("bad value for '") + key + "': " + e.what());
    }
}

inline json parse_object(std::string const& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (json::parse_error const& e) {
        throw ProtocolError(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("message is not a JSON object");
    return j;
}

}  // namespace detail

inline ImageRecord record_from_json(json const& j) {
    if (!j.is_object()) throw ProtocolError("record is not an object");
    ImageRecord r;
    r.quality = detail::field<double>(j, "quality");
    auto g = parse_gender(detail::field<std::string>(j, "gender"));
    if (!g) throw ProtocolError("unknown gender label");
    r.gender = *g;
    auto e = parse_ethnicity(detail::field<std::string>(j, "ethnicity"));
    if (!e) throw ProtocolError("unknown ethnicity label");
    r.ethnicity = *e;
    r.cpu_kwh = detail::field<double>(j, "cpu_kwh");
    r.gpu_kwh = detail::field<double>(j, "gpu_kwh");
    r.duration_s = detail::field<double>(j, "duration_s");
    if (auto v = r.violation()) throw ProtocolError("invalid record: " + *v);
    return r;
}

inline std::string encode(EvaluationRequest const& r) {
    json j{{"id", r.request_id},
           {"positive_prompt", r.positive_prompt},
           {"negative_prompt", r.negative_prompt},
           {"guidance_scale", r.guidance_scale},
           {"inference_steps", r.inference_steps},
           {"image_count", r.image_count},
           {"seed", r.seed}};
    return j.dump();
}

inline EvaluationRequest decode_request(std::string const& line) {
    auto const j = detail::parse_object(line);
    EvaluationRequest r;
    r.request_id = detail::field<std::int64_t>(j, "id");
    r.positive_prompt = detail::field<std::string>(j, "positive_prompt");
    r.negative_prompt = detail::field<std::string>(j, "negative_prompt");
    r.guidance_scale = detail::field<double>(j, "guidance_scale");
    r.inference_steps = detail::field<int>(j, "inference_steps");
    r.image_count = detail::field<int>(j, "image_count");
    r.seed = detail::field<std::uint64_t>(j, "seed");
    if (r.image_count < 1) throw ProtocolError("image_count must be at least 1");
    if (r.inference_steps < 1) throw ProtocolError("inference_steps must be positive");
    return r;
}

/// A negative id encodes as null (reply to a line whose id could not be read).
inline std::string encode(EvaluationResponse const& r) {
    json j{{"id", r.request_id < 0 ? json(nullptr) : json(r.request_id)}};
    if (r.error) {
        j["error"] = *r.error;
    } else {
        json recs = json::array();
        for (auto const& rec : r.records) recs.push_back(record_to_json(rec));
        j["records"] = std::move(recs);
    }
    return j.dump();
}

inline EvaluationResponse decode_response(std::string const& line) {
    auto const j = detail::parse_object(line);
    EvaluationResponse r;
    auto id = j.find("id");
    if (id != j.end() && id->is_number_integer()) r.request_id = id->get<std::int64_t>();
    else if (id == j.end() || !id->is_null()) throw ProtocolError("response without integer id");
    else r.request_id = -1;

    bool const has_records = j.contains("records");
    bool const has_error = j.contains("error");
    if (has_records == has_error) throw ProtocolError("response must carry exactly one of records/error");
    if (has_error) {
        r.error = detail::field<std::string>(j, "error");
        return r;
    }
    auto const& recs = j.at("records");
    if (!recs.is_array()) throw ProtocolError("records is not an array");
    for (auto const& rec : recs) r.records.push_back(record_from_json(rec));
    return r;
}

inline std::string encode(Hello const& h) { return json{{"hello", {{"protocol", h.protocol}, {"mode", h.mode}}}}.dump(); }

inline Hello decode_hello(std::string const& line) {
    auto const j = detail::parse_object(line);
    auto it = j.find("hello");
    if (it == j.end() || !it->is_object()) throw ProtocolError("expected a hello handshake");
    Hello h;
    h.protocol = detail::field<int>(*it, "protocol");
    h.mode = detail::field<std::string>(*it, "mode");
    if (h.mode != "stub" && h.mode != "real") throw ProtocolError("unknown bridge mode '" + h.mode + "'");
    return h;
}

}  // namespace protocol
}  // namespace fairtune

#endif
