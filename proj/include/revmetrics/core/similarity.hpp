#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace revmetrics::core {

/// Decodes UTF-8 into code points; malformed bytes map to U+FFFD.
std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

/// Levenshtein distance over code points divided by the longer length.
double normalized_edit_distance(std::string_view a, std::string_view b);

inline constexpr double kDefaultKlEpsilon = 1e-9;

/// KL(p || q) in nats between two histograms over the same bins. epsilon is
/// added to every bin before normalization. Throws BinMismatch.
double kl_divergence(std::span<const double> p_counts, std::span<const double> q_counts,
                     double epsilon = kDefaultKlEpsilon);

} // namespace revmetrics::core
