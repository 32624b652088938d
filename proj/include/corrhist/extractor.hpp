#pragma once

// Detection of merge, split and distribute corrections between observations,
// and chaining of related corrections into cases.
//
// Between two observations t1 < t2, profile q is a reference predecessor of p
// when q<t1> and p<t2> share a mention, and a consistent predecessor when
// q<t1> is contained in p<t2>. A merge group is the predecessor set P of some
// p with |P| > 1 whose members other than p are empty at t2; a split group is
// the mirror image over successors and emptiness at t1. Mentions moving
// between profiles that stay populated are distributes.

#include <algorithm>
#include <map>
#include <optional>
#include <tuple>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "corrhist/model.hpp"
#include "corrhist/parallel.hpp"
#include "corrhist/union_find.hpp"

namespace corrhist {

enum class CorrectionKind { Merge, Split, Distribute };

inline std::string_view kind_name(CorrectionKind k) {
    switch (k) {
    case CorrectionKind::Merge: return "merge";
    case CorrectionKind::Split: return "split";
    case CorrectionKind::Distribute: return "distribute";
    }
    return "?";
}

inline CorrectionKind parse_kind(std::string_view s) {
    if (s == "merge")
        return CorrectionKind::Merge;
    if (s == "split")
        return CorrectionKind::Split;
    if (s == "distribute")
        return CorrectionKind::Distribute;
    throw Error("unknown correction kind '" + std::string(s) + "'");
}

/// One merge, split or distribute observed between two consecutive
/// observations. Sources are the involved profiles populated at t1, targets
/// those populated at t2 (for a merge into a fresh profile the survivor is
/// not among the sources).
struct RawGroup {
    CorrectionKind kind = CorrectionKind::Merge;
    Date t1;
    Date t2;
    std::vector<std::string> sources;
    std::vector<std::string> targets;
    std::string id;

    std::vector<std::string> profiles() const {
        std::vector<std::string> all;
        std::set_union(sources.begin(), sources.end(), targets.begin(), targets.end(), std::back_inserter(all));
        return all;
    }

    friend bool operator==(const RawGroup&, const RawGroup&) = default;
};

struct CorrectionCase {
    CorrectionKind kind = CorrectionKind::Merge;
    Date t_before;
    Date t_after;
    std::map<std::string, std::vector<Signature>> source_profiles;
    std::map<std::string, std::vector<Signature>> target_profiles;
    /// Target mentions that did not exist in the collection at t_before.
    std::set<MentionKey> new_mentions;
    std::vector<std::string> chained_from;

    std::vector<std::string> profile_ids() const {
        std::set<std::string> ids;
        for (const auto& [id, _] : source_profiles)
            ids.insert(id);
        for (const auto& [id, _] : target_profiles)
            ids.insert(id);
        return {ids.begin(), ids.end()};
    }

    std::size_t mention_count() const {
        std::set<MentionKey> keys;
        for (const auto* side : {&source_profiles, &target_profiles})
            for (const auto& [_, ms] : *side)
                for (const auto& m : ms)
                    keys.insert(m.key());
        return keys.size();
    }

    /// Mentions whose owning profile differs between the two sides.
    std::set<MentionKey> moved_mentions() const {
        std::map<MentionKey, std::string> before;
        for (const auto& [id, ms] : source_profiles)
            for (const auto& m : ms)
                before.emplace(m.key(), id);
        std::set<MentionKey> moved;
        for (const auto& [id, ms] : target_profiles)
            for (const auto& m : ms) {
                auto it = before.find(m.key());
                if (it != before.end() && it->second != id)
                    moved.insert(m.key());
            }
        return moved;
    }

    friend bool operator==(const CorrectionCase&, const CorrectionCase&) = default;
};

/// Profile correspondence between two snapshots. Only profiles whose mention
/// sets differ are indexed: an unchanged profile keeps every mention it had,
/// so it cannot exchange mentions with anyone.
class IntervalDiff {
public:
    IntervalDiff(Snapshot before, Snapshot after) : before_(std::move(before)), after_(std::move(after)) {
        auto a = before_.profiles();
        auto b = after_.profiles();
        std::size_t i = 0, j = 0;
        auto mark = [&](const ProfilePtr& p, auto& owner) {
            for (const auto& m : p->mentions())
                owner.emplace(m.ref(), std::string_view(p->id()));
        };
        while (i < a.size() || j < b.size()) {
            if (j == b.size() || (i < a.size() && a[i]->id() < b[j]->id())) {
                if (!a[i]->empty()) {
                    changed_.push_back(a[i]->id());
                    mark(a[i], owner_before_);
                }
                ++i;
            } else if (i == a.size() || b[j]->id() < a[i]->id()) {
                if (!b[j]->empty()) {
                    changed_.push_back(b[j]->id());
                    mark(b[j], owner_after_);
                }
                ++j;
            } else {
                if (a[i] != b[j] && !a[i]->same_mentions(*b[j])) {
                    changed_.push_back(a[i]->id());
                    mark(a[i], owner_before_);
                    mark(b[j], owner_after_);
                }
                ++i;
                ++j;
            }
        }
    }

    const Snapshot& before() const noexcept { return before_; }
    const Snapshot& after() const noexcept { return after_; }

    /// Profiles whose mention set differs between the observations, sorted.
    const std::vector<std::string>& changed() const noexcept { return changed_; }

    bool empty_before(std::string_view id) const {
        const Profile* p = before_.find_profile(id);
        return !p || p->empty();
    }
    bool empty_after(std::string_view id) const {
        const Profile* p = after_.find_profile(id);
        return !p || p->empty();
    }

    std::set<std::string> predecessors(std::string_view id) const {
        return related(after_.find_profile(id), owner_before_);
    }

    std::set<std::string> successors(std::string_view id) const {
        return related(before_.find_profile(id), owner_after_);
    }

    std::vector<RawGroup> merge_groups() const {
        std::vector<RawGroup> out;
        for (const auto& p : changed_) {
            if (empty_after(p))
                continue;
            auto preds = predecessors(p);
            if (preds.size() < 2)
                continue;
            bool ok = std::all_of(preds.begin(), preds.end(),
                                  [&](const std::string& q) { return q == p || empty_after(q); });
            if (!ok)
                continue;
            RawGroup g;
            g.kind = CorrectionKind::Merge;
            g.sources.assign(preds.begin(), preds.end());
            g.targets = {p};
            out.push_back(std::move(g));
        }
        return finish(std::move(out), "merge");
    }

    std::vector<RawGroup> split_groups() const {
        std::vector<RawGroup> out;
        for (const auto& p : changed_) {
            if (empty_before(p))
                continue;
            auto succs = successors(p);
            if (succs.size() < 2)
                continue;
            bool ok = std::all_of(succs.begin(), succs.end(),
                                  [&](const std::string& q) { return q == p || empty_before(q); });
            if (!ok)
                continue;
            RawGroup g;
            g.kind = CorrectionKind::Split;
            g.sources = {p};
            g.targets.assign(succs.begin(), succs.end());
            out.push_back(std::move(g));
        }
        return finish(std::move(out), "split");
    }

    /// Connected components of the moved-mention relation that have at least
    /// two populated profiles on each side and are not exactly a merge or
    /// split group.
    std::vector<RawGroup> distributes() const {
        std::unordered_map<std::string_view, std::size_t> slot;
        for (std::size_t i = 0; i < changed_.size(); ++i)
            slot.emplace(changed_[i], i);
        UnionFind uf(changed_.size());
        std::vector<bool> moved(changed_.size(), false);
        for (const auto& [m, owner_after] : owner_after_) {
            auto it = owner_before_.find(m);
            if (it == owner_before_.end() || it->second == owner_after)
                continue;
            std::size_t x = slot.at(it->second), y = slot.at(owner_after);
            uf.unite(x, y);
            moved[x] = moved[y] = true;
        }
        std::set<std::vector<std::string>> classified;
        for (const auto* groups : {&merge_cache(), &split_cache()})
            for (const auto& g : *groups)
                classified.insert(g.profiles());

        std::vector<RawGroup> out;
        for (const auto& members : uf.groups()) {
            if (members.size() < 2 || !moved[members.front()])
                continue;
            std::vector<std::string> ids;
            for (std::size_t i : members)
                ids.push_back(changed_[i]);
            std::sort(ids.begin(), ids.end());
            if (classified.count(ids))
                continue;
            RawGroup g;
            g.kind = CorrectionKind::Distribute;
            for (const auto& id : ids) {
                if (!empty_before(id))
                    g.sources.push_back(id);
                if (!empty_after(id))
                    g.targets.push_back(id);
            }
            if (g.sources.size() < 2 || g.targets.size() < 2)
                continue;  // wholesale transfer to a fresh identifier (rename)
            out.push_back(std::move(g));
        }
        std::sort(out.begin(), out.end(),
                  [](const RawGroup& a, const RawGroup& b) { return a.profiles() < b.profiles(); });
        return finish(std::move(out), "distribute");
    }

    /// All groups of the interval. A merge or split group lying inside a
    /// distribute component is absorbed by it, so every profile belongs to at
    /// most one group.
    std::vector<RawGroup> raw_groups() const {
        auto dist = distributes();
        std::set<std::string_view> absorbed;
        for (const auto& g : dist)
            for (const auto& id : g.sources)
                absorbed.insert(id);
        for (const auto& g : dist)
            for (const auto& id : g.targets)
                absorbed.insert(id);
        std::vector<RawGroup> out;
        for (const auto* groups : {&merge_cache(), &split_cache()})
            for (const auto& g : *groups) {
                auto ids = g.profiles();
                bool inside = std::any_of(ids.begin(), ids.end(),
                                          [&](const std::string& id) { return absorbed.count(id) > 0; });
                if (!inside)
                    out.push_back(g);
            }
        out.insert(out.end(), dist.begin(), dist.end());
        return out;
    }

private:
    std::set<std::string> related(const Profile* p,
                                  const std::unordered_map<MentionRef, std::string_view, MentionRefHash>& owner) const {
        std::set<std::string> out;
        if (!p)
            return out;
        for (const auto& m : p->mentions()) {
            auto it = owner.find(m.ref());
            if (it != owner.end())
                out.emplace(it->second);
            else if (!std::binary_search(changed_.begin(), changed_.end(), p->id()))
                out.emplace(p->id());  // unchanged profile relates only to itself
        }
        return out;
    }

    std::vector<RawGroup> finish(std::vector<RawGroup> groups, std::string_view kind) const {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            groups[i].t1 = before_.date();
            groups[i].t2 = after_.date();
            groups[i].id = before_.date().str() + "~" + after_.date().str() + ":" + std::string(kind) + ":" +
                           std::to_string(i + 1);
        }
        return groups;
    }

    const std::vector<RawGroup>& merge_cache() const {
        if (!merges_)
            merges_ = merge_groups();
        return *merges_;
    }
    const std::vector<RawGroup>& split_cache() const {
        if (!splits_)
            splits_ = split_groups();
        return *splits_;
    }

    Snapshot before_;
    Snapshot after_;
    std::vector<std::string> changed_;
    std::unordered_map<MentionRef, std::string_view, MentionRefHash> owner_before_;
    std::unordered_map<MentionRef, std::string_view, MentionRefHash> owner_after_;
    mutable std::optional<std::vector<RawGroup>> merges_;
    mutable std::optional<std::vector<RawGroup>> splits_;
};

namespace detail {

inline IntervalDiff diff_for(const History& h, const Date& t1, const Date& t2) {
    const Snapshot& a = h.at(t1);
    const Snapshot& b = h.at(t2);
    if (!(t1 < t2))
        throw Error("observation interval must satisfy t1 < t2, got " + t1.str() + " and " + t2.str());
    return IntervalDiff(a, b);
}

}  // namespace detail

inline std::set<std::string> reference_predecessors(const History& h, std::string_view p, const Date& t1,
                                                    const Date& t2) {
    return detail::diff_for(h, t1, t2).predecessors(p);
}

inline std::set<std::string> reference_successors(const History& h, std::string_view p, const Date& t1,
                                                  const Date& t2) {
    return detail::diff_for(h, t1, t2).successors(p);
}

/// p1<t1> is a subset of p2<t2>.
inline bool is_consistent_predecessor(const History& h, std::string_view p1, const Date& t1, std::string_view p2,
                                      const Date& t2) {
    if (!(t1 < t2))
        throw Error("observation interval must satisfy t1 < t2, got " + t1.str() + " and " + t2.str());
    const Profile* a = h.at(t1).find_profile(p1);
    const Profile* b = h.at(t2).find_profile(p2);
    if (!a || a->empty())
        return true;
    if (!b)
        return false;
    return std::includes(b->mentions().begin(), b->mentions().end(), a->mentions().begin(), a->mentions().end(),
                         key_less);
}

inline std::vector<RawGroup> detect_merge_groups(const History& h, const Date& t1, const Date& t2) {
    return detail::diff_for(h, t1, t2).merge_groups();
}

inline std::vector<RawGroup> detect_split_groups(const History& h, const Date& t1, const Date& t2) {
    return detail::diff_for(h, t1, t2).split_groups();
}

inline std::vector<RawGroup> detect_distributes(const History& h, const Date& t1, const Date& t2) {
    return detail::diff_for(h, t1, t2).distributes();
}

inline std::vector<RawGroup> detect_raw_groups(const History& h, const Date& t1, const Date& t2) {
    return detail::diff_for(h, t1, t2).raw_groups();
}

/// Raw groups chained into one correction.
struct GroupChain {
    CorrectionKind kind = CorrectionKind::Merge;
    Date t_before;
    Date t_after;
    std::vector<std::string> profiles;
    std::vector<std::string> chained_from;
};

/// Joins groups whose intervals are directly successive (one starts where the
/// other ends) and which share a profile. A chain of mixed kinds is a
/// distribute. Output ordered by t_before, then smallest profile id.
inline std::vector<GroupChain> chain_groups(const std::vector<RawGroup>& groups) {
    UnionFind uf(groups.size());
    std::vector<std::vector<std::string>> members(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i)
        members[i] = groups[i].profiles();
    // (interval start, profile) -> groups starting there that contain it
    std::map<std::pair<std::string_view, std::string_view>, std::vector<std::size_t>> starting;
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (const auto& p : members[i])
            starting[{groups[i].t1.str(), p}].push_back(i);
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (const auto& p : members[i]) {
            auto it = starting.find({groups[i].t2.str(), p});
            if (it != starting.end())
                for (std::size_t j : it->second)
                    uf.unite(i, j);
        }

    std::vector<GroupChain> out;
    for (const auto& comp : uf.groups()) {
        GroupChain c;
        std::set<std::string> profiles;
        c.kind = groups[comp.front()].kind;
        c.t_before = groups[comp.front()].t1;
        c.t_after = groups[comp.front()].t2;
        for (std::size_t i : comp) {
            const RawGroup& g = groups[i];
            if (g.kind != c.kind)
                c.kind = CorrectionKind::Distribute;
            c.t_before = std::min(c.t_before, g.t1);
            c.t_after = std::max(c.t_after, g.t2);
            profiles.insert(members[i].begin(), members[i].end());
            c.chained_from.push_back(g.id);
        }
        c.profiles.assign(profiles.begin(), profiles.end());
        std::sort(c.chained_from.begin(), c.chained_from.end());
        out.push_back(std::move(c));
    }
    std::sort(out.begin(), out.end(), [](const GroupChain& a, const GroupChain& b) {
        return std::tie(a.t_before, a.profiles.front(), a.t_after) < std::tie(b.t_before, b.profiles.front(), b.t_after);
    });
    return out;
}

/// Reads the mention states of a chain's profiles from its bounding snapshots.
inline CorrectionCase materialize_case(const History& h, const GroupChain& chain) {
    const Snapshot& before = h.at(chain.t_before);
    const Snapshot& after = h.at(chain.t_after);
    CorrectionCase c;
    c.kind = chain.kind;
    c.t_before = chain.t_before;
    c.t_after = chain.t_after;
    c.chained_from = chain.chained_from;
    for (const auto& id : chain.profiles) {
        if (const Profile* p = before.find_profile(id); p && !p->empty())
            c.source_profiles.emplace(id, std::vector<Signature>(p->mentions().begin(), p->mentions().end()));
        if (const Profile* p = after.find_profile(id); p && !p->empty()) {
            c.target_profiles.emplace(id, std::vector<Signature>(p->mentions().begin(), p->mentions().end()));
            for (const auto& m : p->mentions()) {
                const DocumentRecord* d = before.find_document(m.document_key);
                if (!d || m.position >= d->names(m.role).size())
                    c.new_mentions.insert(m.key());
            }
        }
    }
    return c;
}

inline std::vector<CorrectionCase> chain_corrections(const History& h, const std::vector<RawGroup>& groups,
                                                     unsigned parallel = 1) {
    auto chains = chain_groups(groups);
    std::vector<CorrectionCase> cases(chains.size());
    parallel_for(chains.size(), parallel, [&](std::size_t i) { cases[i] = materialize_case(h, chains[i]); });
    return cases;
}

/// Raw groups of every consecutive observation pair, in interval order.
inline std::vector<RawGroup> detect_all_raw_groups(const History& h, unsigned parallel = 1) {
    std::size_t pairs = h.size() > 1 ? h.size() - 1 : 0;
    std::vector<std::vector<RawGroup>> per_pair(pairs);
    parallel_for(pairs, parallel, [&](std::size_t i) { per_pair[i] = IntervalDiff(h[i], h[i + 1]).raw_groups(); });
    std::vector<RawGroup> all;
    for (auto& v : per_pair)
        for (auto& g : v)
            all.push_back(std::move(g));
    return all;
}

inline std::vector<CorrectionCase> extract_corrections(const History& h, unsigned parallel = 1) {
    if (h.size() < 2)
        throw Error("correction extraction needs at least two observations");
    return chain_corrections(h, detect_all_raw_groups(h, parallel), parallel);
}

/// Case identifiers `<kind>-<t_before>-<n>`, n counting from 1 per (kind,
/// t_before) in case order.
inline std::vector<std::string> case_ids(const std::vector<CorrectionCase>& cases) {
    std::map<std::pair<CorrectionKind, std::string>, int> seq;
    std::vector<std::string> ids;
    ids.reserve(cases.size());
    for (const auto& c : cases) {
        int n = ++seq[{c.kind, c.t_before.str()}];
        ids.push_back(std::string(kind_name(c.kind)) + "-" + c.t_before.str() + "-" + std::to_string(n));
    }
    return ids;
}

/// One line per case: id, kind, t_before, t_after, profile count, mention count.
inline std::string case_summary_tsv(const std::vector<CorrectionCase>& cases) {
    std::ostringstream out;
    out << "case_id\tkind\tt_before\tt_after\tprofiles\tmentions\n";
    auto ids = case_ids(cases);
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        out << ids[i] << '\t' << kind_name(c.kind) << '\t' << c.t_before << '\t' << c.t_after << '\t'
            << c.profile_ids().size() << '\t' << c.mention_count() << '\n';
    }
    return out.str();
}

/// Same snapshots in reverse order under the original dates, so that the
/// interval (t_i, t_j) of the result observes the transition from t_j to t_i.
inline History time_reversed(const History& h) {
    std::vector<Snapshot> out;
    out.reserve(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        out.push_back(h[h.size() - 1 - i].with_date(h[i].date()));
    return History(std::move(out));
}

}  // namespace corrhist
