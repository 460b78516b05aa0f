#pragma once
// External policy compiler over an OpenAI-compatible chat completions
// endpoint. The request carries a population summary and asks for a single
// policy JSON object; any transport, HTTP, or parse failure is retried once
// and then falls back to the deterministic mock so a run always completes.
//
// The API key is read from the environment variable named in the compiler
// config at call time. It is sent only in the Authorization header and never
// written to logs, audit records, or error strings.

#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "cmag/compiler.hpp"
#include "cmag/dynamics.hpp"

namespace cmag {

inline std::string build_compiler_prompt(const PopulationSummary& summary) {
  std::ostringstream out;
  out << "You design one influence policy for a simulated agent population.\n"
      << "Population snapshot: step " << summary.t << ", topology "
      << summary.topology_label << ", " << summary.n_agents
      << " agents, average prosocial disposition "
      << summary.avg_prosocial << ", average exposure "
      << summary.avg_exposure << ", maximum exposure " << summary.max_exposure
      << ", threat mode " << to_string(summary.threat_mode) << ".\n"
      << "Respond with exactly one JSON object and no other text, with keys:\n"
      << "  theme: one of moral, hope, community, fear\n"
      << "  claim_type: one of factual, exaggerated, misleading\n"
      << "  intensity: number in [0, 1]\n"
      << "  targeting: one of hubs, random, periphery\n"
      << "  timing: one of burst, sustained\n"
      << "  explanation: object with keys declared_theme, declared_claim_type,"
      << " declared_intensity_band (low, medium, or high)\n"
      << "Favor prosocial themes and factual claims.\n";
  return out.str();
}

struct ExternalCallResult {
  std::optional<Policy> policy;
  std::string error;  // human-readable, free of credentials
};

namespace detail {

// Splits "http://host:port" (path suffixes beyond the origin are kept and
// prefixed onto the chat completions route).
struct EndpointParts {
  std::string origin;
  std::string path_prefix;
};

inline std::optional<EndpointParts> split_endpoint(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  EndpointParts parts;
  if (path_start == std::string::npos) {
    parts.origin = url;
  } else {
    parts.origin = url.substr(0, path_start);
    parts.path_prefix = url.substr(path_start);
    while (!parts.path_prefix.empty() && parts.path_prefix.back() == '/')
      parts.path_prefix.pop_back();
  }
  return parts;
}

}  // namespace detail

inline ExternalCallResult call_external_compiler(
    const CompilerConfig& compiler, const PopulationSummary& summary) {
  ExternalCallResult result;
  if (compiler.endpoint_url.empty()) {
    result.error = "no endpoint configured";
    return result;
  }
  const auto parts = detail::split_endpoint(compiler.endpoint_url);
  if (!parts) {
    result.error = "malformed endpoint url";
    return result;
  }

  nlohmann::ordered_json body;
  body["model"] = compiler.model_name;
  body["temperature"] = compiler.temperature;
  body["max_tokens"] = compiler.max_tokens;
  body["messages"] = nlohmann::ordered_json::array(
      {{{"role", "user"}, {"content", build_compiler_prompt(summary)}}});

  httplib::Client client(parts->origin);
  const auto seconds = static_cast<time_t>(compiler.timeout_seconds);
  const auto micros = static_cast<time_t>(
      (compiler.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (!compiler.api_key_env_name.empty()) {
    if (const char* key = std::getenv(compiler.api_key_env_name.c_str());
        key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string route = parts->path_prefix + "/v1/chat/completions";
  auto response =
      client.Post(route, headers, body.dump(), "application/json");
  if (!response) {
    result.error = "transport failure: " + httplib::to_string(response.error());
    return result;
  }
  if (response->status != 200) {
    result.error = "http status " + std::to_string(response->status);
    return result;
  }

  std::string content;
  try {
    const auto parsed = nlohmann::json::parse(response->body);
    content = parsed.at("choices").at(0).at("message").at("content")
                  .get<std::string>();
  } catch (const std::exception&) {
    result.error = "response body is not a chat completion";
    return result;
  }

  std::string parse_error;
  result.policy = parse_policy_json(content, &parse_error);
  if (!result.policy)
    result.error = "policy parse failure: " + parse_error;
  return result;
}

// One attempt plus one retry; on double failure the mock result is used and
// the fallback is flagged so it lands in the audit trail.
inline CompileFn external_compiler(const CompilerConfig& compiler) {
  return [compiler](const PopulationSummary& summary) {
    for (int attempt = 0; attempt < 2; ++attempt) {
      ExternalCallResult call = call_external_compiler(compiler, summary);
      if (call.policy) return CompileOutcome{*call.policy, false};
    }
    return CompileOutcome{mock_compile(summary), true};
  };
}

inline CompileFn make_compiler(const CompilerConfig& compiler) {
  if (compiler.kind == CompilerKind::external)
    return external_compiler(compiler);
  return mock_compiler();
}

}  // namespace cmag
