#include "revmetrics/core/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "revmetrics/error.hpp"

namespace revmetrics::core {

std::u32string decode_utf8(std::string_view text) {
    std::u32string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        int extra = 0;
        char32_t cp = 0;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            extra = 1;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            extra = 2;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            extra = 3;
        } else {
            out.push_back(U'�');
            ++i;
            continue;
        }
        if (i + static_cast<std::size_t>(extra) >= text.size()) {
            out.push_back(U'�');
            break;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(text[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            out.push_back(U'�');
            ++i;
            continue;
        }
        out.push_back(cp);
        i += static_cast<std::size_t>(extra) + 1;
    }
    return out;
}

std::string encode_utf8(std::u32string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char32_t cp : text) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

double normalized_edit_distance(std::string_view a, std::string_view b) {
    const std::u32string s = decode_utf8(a);
    const std::u32string t = decode_utf8(b);
    const std::size_t longest = std::max(s.size(), t.size());
    if (longest == 0)
        return 0.0;
    std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t substitution = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitution});
        }
        std::swap(prev, cur);
    }
    return static_cast<double>(prev[t.size()]) / static_cast<double>(longest);
}

double kl_divergence(std::span<const double> p_counts, std::span<const double> q_counts, double epsilon) {
    if (p_counts.size() != q_counts.size() || p_counts.empty())
        throw Error(ErrorKind::BinMismatch, "histograms have " + std::to_string(p_counts.size()) + " and " +
                                                std::to_string(q_counts.size()) + " bins");
    if (!(epsilon > 0.0))
        throw Error(ErrorKind::InvalidArgument, "smoothing epsilon must be positive");
    double p_total = 0.0, q_total = 0.0;
    for (std::size_t i = 0; i < p_counts.size(); ++i) {
        if (p_counts[i] < 0.0 || q_counts[i] < 0.0)
            throw Error(ErrorKind::InvalidArgument, "negative histogram count");
        p_total += p_counts[i] + epsilon;
        q_total += q_counts[i] + epsilon;
    }
    double kl = 0.0;
    for (std::size_t i = 0; i < p_counts.size(); ++i) {
        const double p = (p_counts[i] + epsilon) / p_total;
        const double q = (q_counts[i] + epsilon) / q_total;
        kl += p * std::log(p / q);
    }
    // Rounding can leave a tiny negative residue for (near-)identical inputs.
    return std::max(kl, 0.0);
}

} // namespace revmetrics::core
