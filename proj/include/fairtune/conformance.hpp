#ifndef FAIRTUNE_CONFORMANCE_HPP
#define FAIRTUNE_CONFORMANCE_HPP

// Protocol conformance checks run against a live bridge: handshake,
// request/response round trip, recovery after malformed input, and
// determinism of repeated requests.

#include <string>
#include <vector>

#include "fairtune/bridge.hpp"

namespace fairtune {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline EvaluationRequest conformance_request(std::int64_t id) {
    EvaluationRequest r;
    r.request_id = id;
    r.positive_prompt = "Photo portrait of a person, photograph, highly detailed";
    r.negative_prompt = "cartoon, blurry";
    r.guidance_scale = 7.0;
    r.inference_steps = 30;
    r.image_count = 20;
    r.seed = 12345;
    return r;
}

/// Runs every check; a check that throws is recorded as failed and later
/// checks still run as long as the connection survives.
inline std::vector<CheckResult> run_conformance(BridgeEvaluator& bridge) {
    std::vector<CheckResult> out;
    auto check = [&](std::string name, auto&& body) {
        CheckResult r{std::move(name), false, {}};
        try {
            r.detail = body();
            r.passed = true;
        } catch (std::exception const& e) {
            r.detail = e.what();
        }
        out.push_back(std::move(r));
    };
    auto fail = [](std::string const& what) { return Error(what); };

    check("handshake", [&] {
        if (bridge.hello().protocol != kProtocolVersion) throw fail("unexpected protocol version");
        return "protocol " + std::to_string(bridge.hello().protocol) + ", mode " + bridge.hello().mode;
    });

    EvaluationResponse first;
    check("round-trip", [&] {
        auto const req = conformance_request(101);
        first = bridge.send_raw(protocol::encode(req));
        if (first.error) throw fail("bridge answered with error: " + *first.error);
        if (first.request_id != req.request_id) throw fail("response id does not match request id");
        if (static_cast<int>(first.records.size()) != req.image_count)
            throw fail("expected " + std::to_string(req.image_count) + " records, got " +
                       std::to_string(first.records.size()));
        if (protocol::decode_response(protocol::encode(first)) != first) throw fail("response does not re-encode losslessly");
        return std::to_string(first.records.size()) + " records";
    });

    check("malformed-json", [&] {
        auto resp = bridge.send_raw("{this is not json");
        if (!resp.error) throw fail("malformed line was answered without an error");
        return "error: " + *resp.error;
    });

    check("invalid-request", [&] {
        auto resp = bridge.send_raw(R"({"id":202,"positive_prompt":"x"})");
        if (!resp.error) throw fail("incomplete request was answered without an error");
        if (resp.request_id != 202) throw fail("error response does not carry the request id");
        return "error: " + *resp.error;
    });

    check("recovery-and-determinism", [&] {
        auto const req = conformance_request(303);
        auto again = bridge.send_raw(protocol::encode(req));
        if (again.error) throw fail("bridge answered with error after malformed input: " + *again.error);
        if (again.request_id != 303) throw fail("response id does not match request id");
        if (again.records != first.records) throw fail("identical request produced different records");
        return std::string("identical records after error recovery");
    });

    check("image-count", [&] {
        auto req = conformance_request(404);
        req.image_count = 3;
        auto resp = bridge.send_raw(protocol::encode(req));
        if (resp.error || resp.records.size() != 3) throw fail("image_count 3 not honoured");
        return std::string("image_count honoured");
    });
    return out;
}

}  // namespace fairtune

#endif
