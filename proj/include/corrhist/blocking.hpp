#pragma once

// Name-blocking study over merge and distribute cases: how often do the names
// of profiles that were later merged land in the same block?

#include <array>
#include <cstdio>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "corrhist/extractor.hpp"

namespace corrhist {

enum class KeyScheme { LastOnly, InitialLast };
enum class CaseMode { ConsiderCase, IgnoreCase };

struct BlockingVariant {
    KeyScheme scheme = KeyScheme::LastOnly;
    CaseMode case_mode = CaseMode::ConsiderCase;
    friend bool operator==(const BlockingVariant&, const BlockingVariant&) = default;
};

/// Column order of the report: consider case (initial + last, last), then
/// ignore case (initial + last, last).
inline constexpr std::array<BlockingVariant, 4> report_variants{{
    {KeyScheme::InitialLast, CaseMode::ConsiderCase},
    {KeyScheme::LastOnly, CaseMode::ConsiderCase},
    {KeyScheme::InitialLast, CaseMode::IgnoreCase},
    {KeyScheme::LastOnly, CaseMode::IgnoreCase},
}};

namespace detail {

inline std::vector<std::string_view> tokens(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t'))
            ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t')
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline bool is_homonym_suffix(std::string_view t) {
    return t.size() == 4 && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

/// Byte length of the UTF-8 sequence starting with `lead`.
inline std::size_t utf8_length(unsigned char lead) {
    if (lead >= 0xF0)
        return 4;
    if (lead >= 0xE0)
        return 3;
    if (lead >= 0xC0)
        return 2;
    return 1;
}

}  // namespace detail

/// Removes a trailing four-digit homonym marker ("Wei Wang 0050" -> "Wei Wang").
inline std::string strip_homonym_suffix(std::string_view surface) {
    auto toks = detail::tokens(surface);
    if (toks.size() > 1 && detail::is_homonym_suffix(toks.back()))
        toks.pop_back();
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i)
            out += ' ';
        out += toks[i];
    }
    return out;
}

/// Block key of a printed name. LastOnly keeps the final token; InitialLast
/// is the first character of the first token, ". ", and the final token.
/// IgnoreCase lowers ASCII letters.
inline std::string blocking_key(std::string_view surface, BlockingVariant v, bool strip_suffix = true) {
    std::string name = strip_suffix ? strip_homonym_suffix(surface) : std::string(surface);
    auto toks = detail::tokens(name);
    if (toks.empty())
        throw Error("name '" + std::string(surface) + "' has no usable tokens");
    std::string key;
    if (v.scheme == KeyScheme::LastOnly) {
        key = std::string(toks.back());
    } else {
        std::string_view first = toks.front();
        key = std::string(first.substr(0, std::min(first.size(), detail::utf8_length(first[0]))));
        key += ". ";
        key += toks.back();
    }
    if (v.case_mode == CaseMode::IgnoreCase)
        for (char& c : key)
            if (c >= 'A' && c <= 'Z')
                c = static_cast<char>(c - 'A' + 'a');
    return key;
}

struct NamePair {
    std::string first;
    std::string second;
    friend bool operator==(const NamePair&, const NamePair&) = default;
};

/// For every merge or distribute case, all pairs of distinct representative
/// surfaces (modal surface at t_before) of its source profiles.
inline std::vector<NamePair> name_pairs(const std::vector<CorrectionCase>& cases) {
    std::vector<NamePair> out;
    for (const auto& c : cases) {
        if (c.kind == CorrectionKind::Split)
            continue;
        std::set<std::string> names;
        for (const auto& [_, ms] : c.source_profiles)
            if (!ms.empty())
                names.insert(representative_surface(ms));
        std::vector<std::string> v(names.begin(), names.end());
        for (std::size_t i = 0; i < v.size(); ++i)
            for (std::size_t j = i + 1; j < v.size(); ++j)
                out.push_back({v[i], v[j]});
    }
    return out;
}

/// Fraction of pairs whose two names share a block.
inline double hit_rate(std::span<const NamePair> pairs, BlockingVariant v, bool strip_suffix = true) {
    if (pairs.empty())
        throw Error("hit rate of an empty pair list is undefined");
    std::size_t hits = 0;
    for (const auto& p : pairs)
        if (blocking_key(p.first, v, strip_suffix) == blocking_key(p.second, v, strip_suffix))
            ++hits;
    return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

struct BlockingRow {
    std::string subset;
    std::size_t pairs = 0;
    std::array<std::optional<double>, 4> rates;  // report_variants order
};

/// Rows for merge+distribute, merge only and distribute only.
inline std::vector<BlockingRow> blocking_report(const std::vector<CorrectionCase>& cases, bool strip_suffix = true) {
    auto subset = [&](std::initializer_list<CorrectionKind> kinds) {
        std::vector<CorrectionCase> out;
        for (const auto& c : cases)
            if (std::find(kinds.begin(), kinds.end(), c.kind) != kinds.end())
                out.push_back(c);
        return out;
    };
    std::vector<BlockingRow> rows;
    auto add = [&](std::string name, const std::vector<CorrectionCase>& cs) {
        BlockingRow row;
        row.subset = std::move(name);
        auto pairs = name_pairs(cs);
        row.pairs = pairs.size();
        if (!pairs.empty())
            for (std::size_t i = 0; i < report_variants.size(); ++i)
                row.rates[i] = hit_rate(pairs, report_variants[i], strip_suffix);
        rows.push_back(std::move(row));
    };
    add("merge+dist", subset({CorrectionKind::Merge, CorrectionKind::Distribute}));
    add("merge", subset({CorrectionKind::Merge}));
    add("distribute", subset({CorrectionKind::Distribute}));
    return rows;
}

inline std::string blocking_report_tsv(const std::vector<BlockingRow>& rows) {
    std::ostringstream out;
    out << "subset\tpairs\tconsider_case_initial_last\tconsider_case_last\tignore_case_initial_last\tignore_case_last\n";
    for (const auto& r : rows) {
        out << r.subset << '\t' << r.pairs;
        for (const auto& rate : r.rates) {
            out << '\t';
            if (rate) {
                char buf[32];
                std::snprintf(buf, sizeof buf, "%.2f%%", *rate * 100.0);
                out << buf;
            } else {
                out << "n/a";
            }
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace corrhist
