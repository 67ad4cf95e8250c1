// Token/cost model and execution limits. The token model is a stand-in for
// provider tokenizers: ceiling(bytes / bytes_per_token), prices per million
// tokens from configuration. Only relative savings are meaningful.
#pragma once

#include <cstdint>
#include <string>

namespace skillcraft::harness {

struct TokenModel {
  long long bytes_per_token = 4;
  double price_in = 3.0;    // currency per 1M input tokens
  double price_out = 15.0;  // currency per 1M output tokens
};

inline long long count_tokens(std::size_t message_bytes, const TokenModel& tm) {
  if (message_bytes == 0) return 0;
  return static_cast<long long>((message_bytes + static_cast<std::size_t>(tm.bytes_per_token) - 1) /
                                static_cast<std::size_t>(tm.bytes_per_token));
}

inline double token_cost(long long in_tokens, long long out_tokens, const TokenModel& tm) {
  return static_cast<double>(in_tokens) / 1e6 * tm.price_in +
         static_cast<double>(out_tokens) / 1e6 * tm.price_out;
}

struct Limits {
  long long max_turns = 150;
  double max_minutes = 60.0;
  long long max_in_tokens = 1000000;
  long long max_out_tokens = 150000;
  long long max_in_tokens_per_request = 150000;
};

}  // namespace skillcraft::harness
