#pragma once

// Test-only helpers: compact snapshot construction and brute-force oracles
// written directly from the definitions, sharing no code with the library's
// detectors.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "corrhist/corrhist.hpp"

namespace testing_support {

using namespace corrhist;

/// Profile id -> mention tokens. A token "dK" is author position 0 of
/// document dK; "dK.P" is position P; "dK.P.e" is editor position P.
using Layout = std::map<std::string, std::vector<std::string>>;

inline MentionKey token_key(const std::string& t) {
    MentionKey k;
    auto dot = t.find('.');
    k.document_key = t.substr(0, dot);
    if (dot != std::string::npos) {
        auto rest = t.substr(dot + 1);
        auto dot2 = rest.find('.');
        k.position = static_cast<std::uint32_t>(std::stoul(rest.substr(0, dot2)));
        if (dot2 != std::string::npos && rest.substr(dot2 + 1) == "e")
            k.role = Role::Editor;
    }
    return k;
}

inline std::string default_surface(const std::string& profile) { return "Name " + profile; }

/// Snapshot whose documents are exactly those named in `all_docs` (each with
/// `slots` author and editor positions) and whose profiles follow `layout`.
inline Snapshot make_snapshot(const std::string& date, const Layout& layout, const std::set<std::string>& all_docs,
                              std::uint32_t slots = 4) {
    std::vector<ProfilePtr> profiles;
    for (const auto& [id, tokens] : layout) {
        std::vector<Signature> ms;
        for (const auto& t : tokens) {
            auto k = token_key(t);
            ms.push_back({k.document_key, k.position, default_surface(id), k.role});
        }
        profiles.push_back(std::make_shared<const Profile>(id, std::move(ms)));
    }
    std::vector<DocumentPtr> docs;
    for (const auto& d : all_docs) {
        DocumentRecord r;
        r.key = d;
        r.title = "Title of " + d;
        r.year = 2000;
        for (std::uint32_t i = 0; i < slots; ++i) {
            r.authors.push_back("Author " + std::to_string(i));
            r.editors.push_back("Editor " + std::to_string(i));
        }
        docs.push_back(std::make_shared<const DocumentRecord>(std::move(r)));
    }
    return Snapshot(Date::parse(date), std::move(profiles), std::move(docs));
}

inline std::set<std::string> docs_in(const std::vector<Layout>& layouts) {
    std::set<std::string> docs;
    for (const auto& s : layouts)
        for (const auto& [_, tokens] : s)
            for (const auto& t : tokens)
                docs.insert(token_key(t).document_key);
    return docs;
}

/// History over consecutive days from 2017-01-01, every snapshot carrying
/// every document mentioned anywhere.
inline History make_history(const std::vector<Layout>& layouts) {
    auto docs = docs_in(layouts);
    std::vector<Snapshot> snaps;
    Date d = Date::parse("2017-01-01");
    for (const auto& s : layouts) {
        snaps.push_back(make_snapshot(d.str(), s, docs));
        d = d.plus_days(1);
    }
    return History(std::move(snaps));
}

inline Date day(int n) { return Date::parse("2017-01-01").plus_days(n); }

// ---------------------------------------------------------------- oracles

using KeySet = std::set<MentionKey>;

inline KeySet keys_of(const Snapshot& s, const std::string& id) {
    KeySet out;
    if (const Profile* p = s.find_profile(id))
        for (const auto& m : p->mentions())
            out.insert(m.key());
    return out;
}

inline std::set<std::string> all_ids(const Snapshot& a, const Snapshot& b) {
    std::set<std::string> ids;
    for (const auto& p : a.profiles())
        ids.insert(p->id());
    for (const auto& p : b.profiles())
        ids.insert(p->id());
    return ids;
}

inline bool intersects(const KeySet& x, const KeySet& y) {
    for (const auto& k : x)
        if (y.count(k))
            return true;
    return false;
}

inline std::set<std::string> oracle_predecessors(const Snapshot& a, const Snapshot& b, const std::string& p) {
    std::set<std::string> out;
    KeySet target = keys_of(b, p);
    for (const auto& q : all_ids(a, b))
        if (intersects(keys_of(a, q), target))
            out.insert(q);
    return out;
}

inline std::set<std::string> oracle_successors(const Snapshot& a, const Snapshot& b, const std::string& p) {
    std::set<std::string> out;
    KeySet source = keys_of(a, p);
    for (const auto& q : all_ids(a, b))
        if (intersects(source, keys_of(b, q)))
            out.insert(q);
    return out;
}

/// (kind, sources, targets), comparable independent of group ids.
using GroupShape = std::tuple<std::string, std::vector<std::string>, std::vector<std::string>>;

inline GroupShape shape(const RawGroup& g) { return {std::string(kind_name(g.kind)), g.sources, g.targets}; }

inline std::set<GroupShape> shapes(const std::vector<RawGroup>& gs) {
    std::set<GroupShape> out;
    for (const auto& g : gs)
        out.insert(shape(g));
    return out;
}

inline std::set<GroupShape> oracle_merges(const Snapshot& a, const Snapshot& b) {
    std::set<GroupShape> out;
    for (const auto& p : all_ids(a, b)) {
        if (keys_of(b, p).empty())
            continue;
        auto preds = oracle_predecessors(a, b, p);
        if (preds.size() < 2)
            continue;
        bool ok = true;
        for (const auto& q : preds)
            ok = ok && (q == p || keys_of(b, q).empty());
        if (ok)
            out.insert({"merge", {preds.begin(), preds.end()}, {p}});
    }
    return out;
}

inline std::set<GroupShape> oracle_splits(const Snapshot& a, const Snapshot& b) {
    std::set<GroupShape> out;
    for (const auto& p : all_ids(a, b)) {
        if (keys_of(a, p).empty())
            continue;
        auto succs = oracle_successors(a, b, p);
        if (succs.size() < 2)
            continue;
        bool ok = true;
        for (const auto& q : succs)
            ok = ok && (q == p || keys_of(a, q).empty());
        if (ok)
            out.insert({"split", {p}, {succs.begin(), succs.end()}});
    }
    return out;
}

/// Components of "p at t1 and q at t2 share a mention, p != q", by flooding.
inline std::vector<std::set<std::string>> oracle_components(const Snapshot& a, const Snapshot& b) {
    auto ids = all_ids(a, b);
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& p : ids)
        for (const auto& q : ids)
            if (p != q && intersects(keys_of(a, p), keys_of(b, q))) {
                adj[p].insert(q);
                adj[q].insert(p);
            }
    std::set<std::string> seen;
    std::vector<std::set<std::string>> out;
    for (const auto& [start, _] : adj) {
        if (seen.count(start))
            continue;
        std::set<std::string> comp;
        std::vector<std::string> stack{start};
        while (!stack.empty()) {
            auto x = stack.back();
            stack.pop_back();
            if (!comp.insert(x).second)
                continue;
            for (const auto& y : adj[x])
                stack.push_back(y);
        }
        seen.insert(comp.begin(), comp.end());
        out.push_back(comp);
    }
    return out;
}

inline std::set<GroupShape> oracle_distributes(const Snapshot& a, const Snapshot& b) {
    std::set<std::set<std::string>> classified;
    const auto merges = oracle_merges(a, b);
    const auto splits = oracle_splits(a, b);
    for (const auto* gs : {&merges, &splits})
        for (const auto& [k, s, t] : *gs) {
            std::set<std::string> all(s.begin(), s.end());
            all.insert(t.begin(), t.end());
            classified.insert(all);
        }
    std::set<GroupShape> out;
    for (const auto& comp : oracle_components(a, b)) {
        if (classified.count(comp))
            continue;
        std::vector<std::string> src, tgt;
        for (const auto& p : comp) {
            if (!keys_of(a, p).empty())
                src.push_back(p);
            if (!keys_of(b, p).empty())
                tgt.push_back(p);
        }
        if (src.size() >= 2 && tgt.size() >= 2)
            out.insert({"distribute", src, tgt});
    }
    return out;
}

/// Distributes plus the merge and split groups not lying inside one.
inline std::set<GroupShape> oracle_raw_groups(const Snapshot& a, const Snapshot& b) {
    auto dist = oracle_distributes(a, b);
    std::set<std::string> absorbed;
    for (const auto& [k, s, t] : dist) {
        absorbed.insert(s.begin(), s.end());
        absorbed.insert(t.begin(), t.end());
    }
    std::set<GroupShape> out = dist;
    const auto merges = oracle_merges(a, b);
    const auto splits = oracle_splits(a, b);
    for (const auto* gs : {&merges, &splits})
        for (const auto& g : *gs) {
            const auto& [k, s, t] = g;
            bool inside = false;
            for (const auto& id : s)
                inside = inside || absorbed.count(id);
            for (const auto& id : t)
                inside = inside || absorbed.count(id);
            if (!inside)
                out.insert(g);
        }
    return out;
}

// ------------------------------------------------------- random histories

/// Two random snapshots over `docs` documents with up to `profiles` profiles.
/// The second reshuffles a fraction of mentions, including to fresh profiles
/// and out of the collection.
inline std::pair<Layout, Layout> random_pair(std::mt19937_64& rng, int docs, int profiles, double churn) {
    auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    auto coin = [&](double p) { return static_cast<double>(rng() % 1000000) / 1e6 < p; };
    Layout a, b;
    for (int d = 0; d < docs; ++d)
        for (int pos = 0; pos < 2; ++pos) {
            std::string tok = "d" + std::to_string(d) + "." + std::to_string(pos);
            bool present_before = coin(0.85);
            std::string owner = "p" + std::to_string(below(profiles));
            if (present_before)
                a[owner].push_back(tok);
            if (present_before && !coin(churn)) {
                b[owner].push_back(tok);
            } else if (coin(0.9)) {
                b["p" + std::to_string(below(profiles + 2))].push_back(tok);
            }
        }
    return {a, b};
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("corrhist-test-" + name + "-" +
                                                       std::to_string(std::random_device{}()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// ------------------------------------------------------ random instances

/// Text exercising escaping: markup characters, quotes, non-ASCII letters.
inline std::string random_text(std::mt19937_64& rng, int words) {
    static const std::vector<std::string> pieces{"Doe", "M\xc3\xbcller", "a&b", "<x>", "\"q\"", "it's", "Zo\xc3\xab",
                                                 "\xe7\x8e\x8b", "Smith", "O'Neil", "x>y", "plain", "1999"};
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (i)
            out += ' ';
        out += pieces[rng() % pieces.size()];
    }
    return out;
}

/// A valid snapshot with venues, links, editors and escaped text.
inline Snapshot random_snapshot(std::mt19937_64& rng, const std::string& date = "2017-01-01") {
    auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    std::map<std::string, std::string> venues;
    int nv = below(4);
    for (int v = 0; v < nv; ++v)
        venues["v" + std::to_string(v)] = random_text(rng, 1 + below(3));
    std::vector<DocumentPtr> docs;
    std::vector<std::pair<MentionKey, std::string>> slots;
    int nd = below(12);
    for (int d = 0; d < nd; ++d) {
        DocumentRecord r;
        r.key = "doc" + std::to_string(d);
        r.title = random_text(rng, 1 + below(5));
        r.year = 1950 + below(70);
        if (nv && below(2))
            r.venue_key = "v" + std::to_string(below(nv));
        if (!below(3))
            r.link = "https://example.org/" + std::to_string(d) + "?a=1&b=2";
        for (int i = below(4); i > 0; --i)
            r.authors.push_back(random_text(rng, 2));
        for (int i = below(3) ? 0 : 1 + below(2); i > 0; --i)
            r.editors.push_back(random_text(rng, 2));
        for (std::uint32_t i = 0; i < r.authors.size(); ++i)
            slots.push_back({{r.key, i, Role::Author}, r.authors[i]});
        for (std::uint32_t i = 0; i < r.editors.size(); ++i)
            slots.push_back({{r.key, i, Role::Editor}, r.editors[i]});
        docs.push_back(std::make_shared<const DocumentRecord>(std::move(r)));
    }
    std::map<std::string, std::vector<Signature>> owned;
    int np = 1 + below(6);
    for (const auto& [k, name] : slots)
        if (below(5))
            owned["p" + std::to_string(below(np))].push_back({k.document_key, k.position, name, k.role});
    if (!below(4))
        owned["empty"];
    std::vector<ProfilePtr> profiles;
    for (auto& [id, ms] : owned)
        profiles.push_back(std::make_shared<const Profile>(id, std::move(ms)));
    return Snapshot(Date::parse(date), std::move(profiles), std::move(docs), std::move(venues));
}

/// A structurally valid case graph.
inline CaseGraph random_case_graph(std::mt19937_64& rng) {
    auto below = [&](int n) { return static_cast<int>(rng() % static_cast<std::uint64_t>(n)); };
    CaseGraph g;
    int np = 1 + below(5), nd = below(5), nv = below(3);
    for (int i = 0; i < np; ++i)
        g.nodes.push_back({NodeLabel::Person, "p" + std::to_string(i), {{"name", random_text(rng, 2)}}, below(2) == 0});
    for (int i = 0; i < nd; ++i) {
        Node n{NodeLabel::Document, "doc" + std::to_string(i), {}, false};
        n.properties.push_back({"year", std::to_string(1990 + below(30))});
        n.properties.push_back({"title", random_text(rng, 3)});
        if (below(2))
            n.properties.push_back({"link", "https://x.org/?q=" + std::to_string(i) + "&r=\"s\""});
        g.nodes.push_back(std::move(n));
    }
    for (int i = 0; i < nv; ++i)
        g.nodes.push_back({NodeLabel::Venue, "v" + std::to_string(i), {{"name", random_text(rng, 2)}}, false});
    for (int a = 0; a < np; ++a) {
        std::string pa = "p" + std::to_string(a);
        for (int d = 0; d < nd; ++d)
            if (below(2))
                g.edges.push_back({below(4) ? EdgeType::Created : EdgeType::Contributed, pa, "doc" + std::to_string(d),
                                   std::nullopt});
        for (int b = a + 1; b < np; ++b)
            if (below(2))
                g.edges.push_back({below(3) ? EdgeType::CoCreated : EdgeType::CoContributed, pa, "p" + std::to_string(b),
                                   static_cast<std::uint32_t>(1 + below(9))});
        for (int v = 0; v < nv; ++v)
            if (below(2))
                g.edges.push_back({below(2) ? EdgeType::CreatedAt : EdgeType::ContributedAt, pa,
                                   "v" + std::to_string(v), static_cast<std::uint32_t>(1 + below(9))});
    }
    g.normalize();
    return g;
}

inline std::vector<Signature> random_signatures(std::mt19937_64& rng, std::set<MentionKey>& used, int n) {
    std::vector<Signature> out;
    for (int i = 0; i < n; ++i) {
        MentionKey k{"doc" + std::to_string(rng() % 20), static_cast<std::uint32_t>(rng() % 3),
                     rng() % 5 ? Role::Author : Role::Editor};
        if (used.insert(k).second)
            out.push_back({k.document_key, k.position, random_text(rng, 2), k.role});
    }
    std::sort(out.begin(), out.end(), key_less);
    return out;
}

inline EmbeddedAnnotation random_annotation(std::mt19937_64& rng, const std::string& id) {
    EmbeddedAnnotation a;
    a.case_id = id;
    a.kind = static_cast<CorrectionKind>(rng() % 3);
    a.coalesced_possible = rng() % 2;
    std::set<MentionKey> before, after;
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i)
        a.source["p" + std::to_string(i)] = random_signatures(rng, before, 1 + static_cast<int>(rng() % 4));
    for (int i = 0, n = 1 + static_cast<int>(rng() % 3); i < n; ++i) {
        auto ms = random_signatures(rng, after, 1 + static_cast<int>(rng() % 4));
        for (const auto& m : ms)
            if (!before.count(m.key()) && rng() % 2)
                a.new_mentions.insert(m.key());
        a.target["p" + std::to_string(i + 1)] = std::move(ms);
    }
    return a;
}

// --------------------------------------------------- ground-truth matching

inline std::vector<std::string> keys_sorted(const std::map<std::string, std::vector<Signature>>& m) {
    std::vector<std::string> out;
    for (const auto& [k, _] : m)
        out.push_back(k);
    return out;
}

/// Differences between extracted cases and the logged corrections: every
/// logged merge, split or distribute must appear as exactly one case with the
/// same interval, kind, source and target profiles and moved mentions, and no
/// other case may exist. Empty when they agree.
inline std::vector<std::string> log_mismatches(const std::vector<CorrectionCase>& cases, const GroundTruthLog& log) {
    using Key = std::tuple<std::string, std::string, std::string, std::vector<std::string>, std::vector<std::string>,
                           std::set<MentionKey>>;
    std::multiset<Key> expected, actual;
    for (const auto& e : log)
        if (is_correction(e.kind))
            expected.insert({e.t_before.str(), e.t_after.str(), std::string(edit_kind_name(e.kind)), e.sources,
                             e.targets, std::set<MentionKey>(e.mentions.begin(), e.mentions.end())});
    for (const auto& c : cases)
        actual.insert({c.t_before.str(), c.t_after.str(), std::string(kind_name(c.kind)), keys_sorted(c.source_profiles),
                       keys_sorted(c.target_profiles), c.moved_mentions()});
    auto describe = [](const Key& k) {
        std::string s = std::get<2>(k) + " " + std::get<0>(k) + ".." + std::get<1>(k) + " [";
        for (const auto& x : std::get<3>(k))
            s += x + " ";
        s += "] -> [";
        for (const auto& x : std::get<4>(k))
            s += x + " ";
        return s + "] moving " + std::to_string(std::get<5>(k).size());
    };
    std::vector<std::string> out;
    for (const auto& k : expected)
        if (actual.count(k) < expected.count(k))
            out.push_back("missed: " + describe(k));
    for (const auto& k : actual)
        if (expected.count(k) < actual.count(k))
            out.push_back("spurious: " + describe(k));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ------------------------------------------------------ case-graph recount

struct GraphRecount {
    std::set<std::string> persons, documents, venues;
    std::map<std::pair<std::string, std::string>, std::uint32_t> co_created;
};

/// Recount of one side of a case by scanning every profile of `state`.
/// Documents count toward weights only if present in `weights`.
inline GraphRecount recount(const std::map<std::string, std::vector<Signature>>& primaries, const Snapshot& state,
                            const Snapshot& weights) {
    GraphRecount r;
    for (const auto& [id, ms] : primaries) {
        r.persons.insert(id);
        for (const auto& m : ms)
            r.documents.insert(m.document_key);
    }
    for (const auto& d : r.documents)
        if (const auto* rec = state.find_document(d); rec && rec->venue_key)
            r.venues.insert(*rec->venue_key);
    for (const auto& d : r.documents) {
        std::set<std::string> authors;
        for (const auto& p : state.profiles())
            for (const auto& m : p->mentions())
                if (m.document_key == d) {
                    r.persons.insert(p->id());
                    if (m.role == Role::Author)
                        authors.insert(p->id());
                }
        if (!weights.find_document(d))
            continue;
        for (const auto& x : authors)
            for (const auto& y : authors)
                if (x < y)
                    ++r.co_created[{x, y}];
    }
    return r;
}

inline GraphRecount recount_of(const CaseGraph& g) {
    GraphRecount r;
    for (const auto& n : g.nodes)
        (n.label == NodeLabel::Person ? r.persons : n.label == NodeLabel::Document ? r.documents : r.venues).insert(n.id);
    for (const auto& e : g.edges)
        if (e.type == EdgeType::CoCreated)
            r.co_created[{e.from, e.to}] = e.weight.value_or(0);
    return r;
}

inline bool operator==(const GraphRecount& a, const GraphRecount& b) {
    return a.persons == b.persons && a.documents == b.documents && a.venues == b.venues && a.co_created == b.co_created;
}

// ------------------------------------------------------------ name pairs

/// Printed names with mixed case, initials, non-ASCII letters, extra spaces
/// and homonym suffixes.
inline std::string random_name(std::mt19937_64& rng) {
    static const std::vector<std::string> firsts{"John", "J.", "john", "JOHN", "Bob", "Robert", "\xc3\x89mile", "\xc3\xa9mile",
                                                 "Wei", "W.", "wei", "Anna-Lena", "\xe7\x8e\x8b", "A"};
    static const std::vector<std::string> middles{"A.", "B.", "Maria", "van"};
    static const std::vector<std::string> lasts{"Doe", "DOE", "doe", "Wang", "wang", "Smith", "M\xc3\xbcller", "M\xc3\x9cLLER",
                                                "O'Neil", "Zhang"};
    std::string s = firsts[rng() % firsts.size()];
    if (rng() % 3 == 0)
        s += (rng() % 4 == 0 ? "  " : " ") + middles[rng() % middles.size()];
    s += " " + lasts[rng() % lasts.size()];
    if (rng() % 5 == 0) {
        char buf[8];
        std::snprintf(buf, sizeof buf, " %04d", static_cast<int>(rng() % 60));
        s += buf;
    }
    return s;
}

inline std::vector<NamePair> random_name_pairs(std::mt19937_64& rng, std::size_t n) {
    std::vector<NamePair> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back({random_name(rng), random_name(rng)});
    return out;
}

}  // namespace testing_support
