#pragma once

// Synthetic histories with a known log of injected corrections.
//
// The initial snapshot carries planted defects: synonyms (one person spread
// over two profiles) and homonyms (two persons pooled into one profile).
// Each later interval applies a planned number of edits.

#include <algorithm>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "corrhist/errors.hpp"
#include "corrhist/model.hpp"
#include "corrhist/random.hpp"

namespace corrhist {

enum class EditKind { Merge, Split, Distribute, Rename, NewPublication };

inline std::string_view edit_kind_name(EditKind k) {
    switch (k) {
    case EditKind::Merge: return "merge";
    case EditKind::Split: return "split";
    case EditKind::Distribute: return "distribute";
    case EditKind::Rename: return "rename";
    case EditKind::NewPublication: return "new-publication";
    }
    return "?";
}

inline EditKind parse_edit_kind(std::string_view s) {
    for (EditKind k : {EditKind::Merge, EditKind::Split, EditKind::Distribute, EditKind::Rename,
                       EditKind::NewPublication})
        if (edit_kind_name(k) == s)
            return k;
    throw Error("unknown edit kind '" + std::string(s) + "'");
}

inline bool is_correction(EditKind k) {
    return k == EditKind::Merge || k == EditKind::Split || k == EditKind::Distribute;
}

/// Which earlier edits a new correction must stay clear of.
/// None: only edits of the same interval. Adjacent: also the previous
/// interval, so no two corrections chain. Global: every earlier edit.
enum class Isolation { None, Adjacent, Global };

struct IntervalPlan {
    std::size_t merges = 0;
    std::size_t splits = 0;
    std::size_t distributes = 0;
    std::size_t renames = 0;
    std::size_t new_publications = 0;

    std::size_t total() const noexcept { return merges + splits + distributes + renames + new_publications; }
    friend bool operator==(const IntervalPlan&, const IntervalPlan&) = default;
};

inline std::vector<Date> daily_dates(const Date& start, std::size_t n) {
    std::vector<Date> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(start.plus_days(static_cast<int>(i)));
    return out;
}

/// One edit per interval, kinds in seeded random order.
inline std::vector<IntervalPlan> dense_plan(const IntervalPlan& totals, std::uint64_t seed) {
    std::vector<EditKind> kinds;
    kinds.insert(kinds.end(), totals.merges, EditKind::Merge);
    kinds.insert(kinds.end(), totals.splits, EditKind::Split);
    kinds.insert(kinds.end(), totals.distributes, EditKind::Distribute);
    kinds.insert(kinds.end(), totals.renames, EditKind::Rename);
    kinds.insert(kinds.end(), totals.new_publications, EditKind::NewPublication);
    Rng rng(seed ^ 0x5deece66dULL);
    rng.shuffle(kinds);
    std::vector<IntervalPlan> out(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        switch (kinds[i]) {
        case EditKind::Merge: out[i].merges = 1; break;
        case EditKind::Split: out[i].splits = 1; break;
        case EditKind::Distribute: out[i].distributes = 1; break;
        case EditKind::Rename: out[i].renames = 1; break;
        case EditKind::NewPublication: out[i].new_publications = 1; break;
        }
    }
    return out;
}

struct GeneratorConfig {
    std::uint64_t seed = 1;
    std::size_t persons = 1000;
    std::size_t documents = 5000;
    std::size_t venues = 0;  // 0: documents / 50 + 1
    std::vector<Date> dates;
    std::vector<IntervalPlan> plan;  // dates.size() - 1 entries
    double abbreviation_rate = 0.35;
    double middle_name_rate = 0.25;
    double synonym_rate = 0.08;
    double homonym_rate = 0.04;
    double editor_document_rate = 0.03;
    Isolation isolation = Isolation::Adjacent;

    static GeneratorConfig desk(std::uint64_t seed) {
        GeneratorConfig c;
        c.seed = seed;
        c.plan.assign(10, IntervalPlan{2, 1, 1, 1, 5});
        c.dates = daily_dates(Date::parse("2017-01-01"), c.plan.size() + 1);
        return c;
    }

    static GeneratorConfig stress(std::uint64_t seed) {
        GeneratorConfig c;
        c.seed = seed;
        c.persons = 100'000;
        c.documents = 500'000;
        c.plan.assign(19, IntervalPlan{40, 15, 15, 5, 200});
        c.dates = daily_dates(Date::parse("2017-01-01"), 20);
        return c;
    }

    /// Dense single-edit intervals, one day apart.
    static GeneratorConfig dense(std::uint64_t seed, const IntervalPlan& totals) {
        GeneratorConfig c;
        c.seed = seed;
        c.plan = dense_plan(totals, seed);
        c.dates = daily_dates(Date::parse("2017-01-01"), c.plan.size() + 1);
        return c;
    }
};

/// A reassignment of one mention, optionally with a new surface.
struct Move {
    MentionKey mention;
    std::string from;
    std::string to;
    std::optional<std::string> surface;
};

/// Everything needed to replay one edit on a snapshot.
struct EditRecord {
    EditKind kind = EditKind::Merge;
    std::vector<std::string> sources;  // populated before, sorted
    std::vector<std::string> targets;  // populated after, sorted
    std::vector<Move> moves;
    std::optional<DocumentRecord> document;                 // new publication
    std::vector<std::pair<std::string, Signature>> additions;  // (profile, signature)

    /// Mentions the edit reassigns or adds, sorted.
    std::vector<MentionKey> touched_mentions() const {
        std::vector<MentionKey> out;
        for (const auto& m : moves)
            out.push_back(m.mention);
        for (const auto& [_, s] : additions)
            out.push_back(s.key());
        std::sort(out.begin(), out.end());
        return out;
    }
};

struct GroundTruthEntry {
    std::size_t interval = 0;
    Date t_before;
    Date t_after;
    EditKind kind = EditKind::Merge;
    std::vector<std::string> sources;
    std::vector<std::string> targets;
    std::vector<MentionKey> mentions;

    friend bool operator==(const GroundTruthEntry&, const GroundTruthEntry&) = default;
};

using GroundTruthLog = std::vector<GroundTruthEntry>;

namespace detail {

inline std::string join(const std::vector<std::string>& v, char sep) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            out += sep;
        out += v[i];
    }
    return out;
}

inline std::vector<std::string> split_on(std::string_view s, char sep) {
    std::vector<std::string> out;
    if (s.empty())
        return out;
    std::size_t start = 0;
    for (;;) {
        std::size_t p = s.find(sep, start);
        out.emplace_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
        if (p == std::string_view::npos)
            break;
        start = p + 1;
    }
    return out;
}

}  // namespace detail

/// Mentions are written as document:position:role, joined by ';'.
inline std::string ground_truth_tsv(const GroundTruthLog& log) {
    std::ostringstream out;
    out << "interval\tt_before\tt_after\tkind\tsources\ttargets\tmentions\n";
    for (const auto& e : log) {
        std::vector<std::string> ms;
        for (const auto& m : e.mentions)
            ms.push_back(m.document_key + ":" + std::to_string(m.position) + ":" + std::string(role_name(m.role)));
        out << e.interval << '\t' << e.t_before << '\t' << e.t_after << '\t' << edit_kind_name(e.kind) << '\t'
            << detail::join(e.sources, ',') << '\t' << detail::join(e.targets, ',') << '\t' << detail::join(ms, ';')
            << '\n';
    }
    return out.str();
}

inline GroundTruthLog parse_ground_truth_tsv(std::string_view text) {
    GroundTruthLog log;
    auto lines = detail::split_on(text, '\n');
    if (lines.empty() || lines[0] != "interval\tt_before\tt_after\tkind\tsources\ttargets\tmentions")
        throw Error("ground-truth log: unexpected header");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        auto cols = detail::split_on(lines[i], '\t');
        if (cols.size() != 7)
            throw Error("ground-truth log line " + std::to_string(i + 1) + ": expected 7 columns");
        GroundTruthEntry e;
        e.interval = std::stoul(cols[0]);
        e.t_before = Date::parse(cols[1]);
        e.t_after = Date::parse(cols[2]);
        e.kind = parse_edit_kind(cols[3]);
        e.sources = detail::split_on(cols[4], ',');
        e.targets = detail::split_on(cols[5], ',');
        for (const auto& m : detail::split_on(cols[6], ';')) {
            auto parts = detail::split_on(m, ':');
            if (parts.size() != 3)
                throw Error("ground-truth log line " + std::to_string(i + 1) + ": bad mention '" + m + "'");
            e.mentions.push_back({parts[0], static_cast<std::uint32_t>(std::stoul(parts[1])),
                                  parts[2] == "editor" ? Role::Editor : Role::Author});
        }
        log.push_back(std::move(e));
    }
    return log;
}

/// Copy-on-write view of a snapshot being edited.
class SnapshotBuilder {
public:
    explicit SnapshotBuilder(Snapshot base) : base_(std::move(base)) {}

    /// Current mentions of `id`, sorted by key; empty if absent.
    std::span<const Signature> mentions(const std::string& id) const {
        if (auto it = overlay_.find(id); it != overlay_.end())
            return it->second;
        if (const Profile* p = base_.find_profile(id))
            return p->mentions();
        return {};
    }

    bool populated(const std::string& id) const { return !mentions(id).empty(); }

    void set(const std::string& id, std::vector<Signature> ms) {
        std::sort(ms.begin(), ms.end(), key_less);
        overlay_[id] = std::move(ms);
    }

    const DocumentRecord* document(std::string_view key) const {
        for (const auto& d : new_documents_)
            if (d->key == key)
                return d.get();
        return base_.find_document(key);
    }

    void add_document(DocumentRecord d) {
        if (document(d.key))
            throw InfeasibleError("document '" + d.key + "' already exists");
        new_documents_.push_back(std::make_shared<const DocumentRecord>(std::move(d)));
    }

    void apply(const EditRecord& e) {
        if (e.kind != EditKind::NewPublication)
            for (const auto& s : e.sources)
                if (!populated(s))
                    throw InfeasibleError(std::string(edit_kind_name(e.kind)) + " needs populated profile '" + s +
                                          "'");
        if (e.document)
            add_document(*e.document);
        std::map<std::string, std::vector<Signature>> work;
        auto load = [&](const std::string& id) -> std::vector<Signature>& {
            auto it = work.find(id);
            if (it == work.end()) {
                auto ms = mentions(id);
                it = work.emplace(id, std::vector<Signature>(ms.begin(), ms.end())).first;
            }
            return it->second;
        };
        std::vector<Signature> moving;
        for (const auto& mv : e.moves) {
            auto& from = load(mv.from);
            auto it = std::find_if(from.begin(), from.end(), [&](const Signature& s) { return s.key() == mv.mention; });
            if (it == from.end())
                throw InfeasibleError("profile '" + mv.from + "' does not hold (" + mv.mention.document_key + ", " +
                                      std::to_string(mv.mention.position) + ")");
            Signature s = std::move(*it);
            from.erase(it);
            if (mv.surface)
                s.surface = *mv.surface;
            moving.push_back(std::move(s));
        }
        for (std::size_t i = 0; i < e.moves.size(); ++i)
            load(e.moves[i].to).push_back(std::move(moving[i]));
        for (const auto& [id, s] : e.additions) {
            const DocumentRecord* d = document(s.document_key);
            if (!d || s.position >= d->names(s.role).size())
                throw InfeasibleError("addition to '" + id + "' references a missing document slot");
            load(id).push_back(s);
        }
        for (auto& [id, ms] : work)
            set(id, std::move(ms));
    }

    Snapshot build(Date date) const { return base_.derive(std::move(date), overlay_, new_documents_); }

private:
    Snapshot base_;
    std::map<std::string, std::vector<Signature>> overlay_;  // empty vector: profile removed
    std::vector<DocumentPtr> new_documents_;
};

/// Replays one edit; the result keeps the snapshot's date.
inline Snapshot apply_edit(const Snapshot& s, const EditRecord& e) {
    SnapshotBuilder b(s);
    b.apply(e);
    return b.build(s.date());
}

struct Generated {
    History history;
    GroundTruthLog log;
};

namespace detail {

inline const std::vector<std::string>& first_names() {
    static const std::vector<std::string> v{
        "Alice", "Bob", "Carla", "David", "Elena", "Farid", "Grace", "Hiro", "Ines", "Jonas", "Kavya", "Lars",
        "Mei", "Nils", "Olga", "Pedro", "Qing", "Rosa", "Sven", "Tara", "Umar", "Vera", "Wei", "Xavier",
        "Yara", "Zoltan", "Anna", "Bruno", "Chen", "Dana", "Emil", "Fatima", "Georg", "Hana", "Ivan", "Julia",
        "Kenji", "Lena", "Marco", "Nora", "Oscar", "Priya", "Rafael", "Sara", "Tomas", "Ulla", "Victor", "Wen",
        "Yusuf", "Zhang", "Jun", "Li", "Min", "Akira", "Beatriz", "Cyril", "Dmitri", "Eva", "Felix", "Gita",
        "Robert", "William", "Elizabeth", "Alexander", "Margaret", "Richard", "Katherine", "James"};
    return v;
}

inline const std::vector<std::string>& last_names() {
    static const std::vector<std::string> v{
        "Smith", "Wang", "Li", "Zhang", "Chen", "Liu", "Yang", "Huang", "Zhao", "Wu", "Zhou", "Xu",
        "Sun", "Ma", "Zhu", "Hu", "Guo", "He", "Lin", "Luo", "Kim", "Lee", "Park", "Choi",
        "Jung", "Kang", "Cho", "Yoon", "Tanaka", "Suzuki", "Sato", "Takahashi", "Watanabe", "Ito", "Yamamoto",
        "Nakamura", "Kobayashi", "Mueller", "Schmidt", "Schneider", "Fischer", "Weber", "Meyer", "Wagner",
        "Becker", "Schulz", "Hoffmann", "Koch", "Richter", "Klein", "Wolf", "Rossi", "Russo", "Ferrari",
        "Esposito", "Bianchi", "Romano", "Colombo", "Ricci", "Marino", "Garcia", "Martinez", "Lopez",
        "Gonzalez", "Rodriguez", "Fernandez", "Perez", "Sanchez", "Ramirez", "Torres", "Silva", "Santos",
        "Oliveira", "Souza", "Costa", "Pereira", "Almeida", "Dubois", "Martin", "Bernard", "Thomas", "Petit",
        "Durand", "Leroy", "Moreau", "Simon", "Laurent", "Johnson", "Williams", "Brown", "Jones", "Miller",
        "Davis", "Wilson", "Anderson", "Taylor", "Moore", "Jackson", "White", "Harris", "Clark", "Lewis",
        "Walker", "Hall", "Allen", "Young", "King", "Wright", "Scott", "Green", "Baker", "Adams", "Nelson",
        "Hill", "Campbell", "Mitchell", "Roberts", "Carter", "Phillips", "Evans", "Turner", "Doe"};
    return v;
}

inline const std::vector<std::string>& title_words() {
    static const std::vector<std::string> v{
        "Scalable", "Robust", "Efficient", "Adaptive", "Incremental", "Distributed", "Probabilistic", "Graph",
        "Entity", "Query", "Index", "Stream", "Schema", "Record", "Linkage", "Matching", "Learning", "Inference",
        "Sampling", "Ranking", "Clustering", "Provenance", "Versioning", "Storage", "Transactions", "Caching",
        "Embeddings", "Networks", "Resolution", "Integration", "Cleaning", "Curation", "Bibliographic", "Metadata"};
    return v;
}

inline std::string numbered(char prefix, std::size_t n, int width = 7) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, n);
    return buf;
}

inline std::optional<std::string> nickname(std::string_view first) {
    static const std::map<std::string, std::string, std::less<>> table{
        {"Robert", "Bob"},     {"William", "Bill"}, {"Elizabeth", "Liz"}, {"Alexander", "Sasha"},
        {"Margaret", "Peggy"}, {"Richard", "Dick"}, {"Katherine", "Kate"}, {"James", "Jim"}};
    auto it = table.find(first);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

struct Person {
    std::uint32_t first = 0;
    std::uint32_t last = 0;
    char middle = 0;  // 0: none
    std::string suffix;
};

/// How one mention prints its person's name.
struct NameStyle {
    bool abbreviate = false;
    bool middle = false;
    bool nickname = false;
    bool upper_last = false;
};

inline std::string render_name(const Person& p, const NameStyle& st, const std::vector<std::string>& fn,
                               const std::vector<std::string>& ln) {
    std::string first = fn[p.first];
    if (st.nickname)
        if (auto n = nickname(first))
            first = *n;
    std::string s = st.abbreviate ? first.substr(0, 1) + "." : first;
    if (p.middle && st.middle)
        s += std::string(" ") + p.middle + ".";
    std::string last = ln[p.last];
    if (st.upper_last)
        for (char& c : last)
            if (c >= 'a' && c <= 'z')
                c = static_cast<char>(c - 'a' + 'A');
    s += " " + last;
    if (!p.suffix.empty())
        s += " " + p.suffix;
    return s;
}

inline bool share_document(std::span<const Signature> a, std::span<const Signature> b) {
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() && j != b.end()) {
        int c = i->document_key.compare(j->document_key);
        if (c == 0)
            return true;
        (c < 0 ? i : j)++;
    }
    return false;
}

class Generator {
public:
    explicit Generator(const GeneratorConfig& c) : config_(c), rng_(c.seed) {
        if (c.dates.size() < 1)
            throw Error("generator needs at least one date");
        if (c.plan.size() + 1 != c.dates.size())
            throw Error("generator plan has " + std::to_string(c.plan.size()) + " intervals for " +
                        std::to_string(c.dates.size()) + " dates");
        for (std::size_t i = 1; i < c.dates.size(); ++i)
            if (!(c.dates[i - 1] < c.dates[i]))
                throw OrderError("generator dates must be strictly increasing");
        if (c.persons == 0 || c.documents == 0)
            throw Error("generator needs at least one person and one document");
        for (double r : {c.abbreviation_rate, c.middle_name_rate, c.synonym_rate, c.homonym_rate,
                         c.editor_document_rate})
            if (!(r >= 0.0 && r <= 1.0))
                throw Error("generator rates must lie in [0, 1]");
    }

    Generated run() {
        std::vector<Snapshot> snaps;
        snaps.reserve(config_.dates.size());
        snaps.push_back(initial());
        GroundTruthLog log;
        std::unordered_set<std::string> previous;
        for (std::size_t k = 0; k < config_.plan.size(); ++k) {
            SnapshotBuilder b(snaps.back());
            builder_ = &b;
            current_.clear();
            locked_ = config_.isolation == Isolation::Adjacent ? previous : std::unordered_set<std::string>{};
            std::vector<EditKind> kinds;
            const auto& p = config_.plan[k];
            kinds.insert(kinds.end(), p.merges, EditKind::Merge);
            kinds.insert(kinds.end(), p.splits, EditKind::Split);
            kinds.insert(kinds.end(), p.distributes, EditKind::Distribute);
            kinds.insert(kinds.end(), p.renames, EditKind::Rename);
            kinds.insert(kinds.end(), p.new_publications, EditKind::NewPublication);
            rng_.shuffle(kinds);
            for (EditKind kind : kinds) {
                EditRecord e = make(kind, k);
                b.apply(e);
                for (const auto& id : e.sources)
                    touch(id);
                for (const auto& id : e.targets)
                    touch(id);
                refresh_live(e);
                log.push_back({k, config_.dates[k], config_.dates[k + 1], e.kind, e.sources, e.targets,
                               e.touched_mentions()});
            }
            snaps.push_back(b.build(config_.dates[k + 1]));
            builder_ = nullptr;
            previous = current_;
        }
        return {History(std::move(snaps)), std::move(log)};
    }

private:
    const std::vector<std::string>& fn_ = first_names();
    const std::vector<std::string>& ln_ = last_names();

    GeneratorConfig config_;
    Rng rng_;
    std::vector<Person> persons_;
    std::vector<std::vector<std::uint32_t>> doc_people_;  // person per position, indexed by document number - 1
    std::vector<std::string> venue_keys_;
    std::size_t next_profile_ = 1;
    std::size_t next_document_ = 1;

    std::vector<std::string> live_;
    std::unordered_map<std::string, std::size_t> live_index_;
    std::vector<std::pair<std::string, std::string>> synonym_pairs_;
    std::size_t synonym_cursor_ = 0;
    std::vector<std::string> homonym_profiles_;
    std::size_t homonym_cursor_ = 0;

    SnapshotBuilder* builder_ = nullptr;
    std::unordered_set<std::string> current_;
    std::unordered_set<std::string> locked_;
    std::unordered_set<std::string> ever_;

    static constexpr int attempts = 2000;

    std::string fresh_profile() { return numbered('p', next_profile_++); }

    void touch(const std::string& id) {
        current_.insert(id);
        if (config_.isolation == Isolation::Global)
            ever_.insert(id);
    }

    bool available(const std::string& id) const {
        return !current_.count(id) && !locked_.count(id) && !ever_.count(id) && builder_->populated(id);
    }

    void set_live(const std::string& id, bool on) {
        auto it = live_index_.find(id);
        if (on && it == live_index_.end()) {
            live_index_[id] = live_.size();
            live_.push_back(id);
        } else if (!on && it != live_index_.end()) {
            std::size_t i = it->second;
            live_index_.erase(it);
            if (i + 1 != live_.size()) {
                live_[i] = std::move(live_.back());
                live_index_[live_[i]] = i;
            }
            live_.pop_back();
        }
    }

    void refresh_live(const EditRecord& e) {
        std::set<std::string> ids(e.sources.begin(), e.sources.end());
        ids.insert(e.targets.begin(), e.targets.end());
        for (const auto& id : ids)
            set_live(id, builder_->populated(id));
    }

    std::uint32_t person_of(const MentionKey& m) const {
        std::size_t doc = std::stoul(m.document_key.substr(1)) - 1;
        return doc_people_[doc][m.position];  // a document has authors or editors, never both
    }

    std::string surface_for(const Person& p) {
        NameStyle st;
        st.middle = rng_.chance(0.5);
        st.abbreviate = rng_.chance(config_.abbreviation_rate);
        st.nickname = rng_.chance(0.3);
        st.upper_last = rng_.chance(0.04);
        return render_name(p, st, fn_, ln_);
    }

    std::string random_title() {
        const auto& w = title_words();
        return w[rng_.index(w.size())] + " " + w[rng_.index(w.size())] + " for " + w[rng_.index(w.size())] + " " +
               w[rng_.index(w.size())];
    }

    DocumentRecord make_document(std::size_t n, int year) {
        DocumentRecord d;
        d.key = numbered('d', n);
        d.title = random_title();
        d.year = year;
        if (!venue_keys_.empty() && rng_.chance(0.9))
            d.venue_key = venue_keys_[rng_.index(venue_keys_.size())];
        if (rng_.chance(0.7))
            d.link = "https://doi.org/10.5555/" + d.key;
        return d;
    }

    Snapshot initial() {
        const auto& c = config_;
        persons_.resize(c.persons);
        std::map<std::pair<std::uint32_t, std::uint32_t>, int> name_count;
        for (auto& p : persons_) {
            p.first = static_cast<std::uint32_t>(rng_.index(fn_.size()));
            p.last = static_cast<std::uint32_t>(rng_.index(ln_.size()));
            if (rng_.chance(c.middle_name_rate))
                p.middle = static_cast<char>('A' + rng_.index(26));
            int n = ++name_count[{p.first, p.last}];
            if (n > 1 && rng_.chance(0.5))
                p.suffix = numbered('0', static_cast<std::size_t>(n), 3);
        }

        std::size_t n_venues = c.venues ? c.venues : c.documents / 50 + 1;
        std::map<std::string, std::string> venues;
        for (std::size_t v = 1; v <= n_venues; ++v) {
            std::string key = numbered('v', v, 4);
            const auto& w = title_words();
            std::string name = (rng_.chance(0.5) ? "Journal of " : "Conference on ") + w[rng_.index(w.size())] +
                               " " + w[rng_.index(w.size())];
            venues.emplace(key, name);
            venue_keys_.push_back(key);
        }

        const std::size_t block = 20;
        std::vector<std::vector<Signature>> person_mentions(c.persons);
        std::vector<DocumentPtr> docs;
        docs.reserve(c.documents);
        doc_people_.reserve(c.documents + 1024);
        for (std::size_t i = 0; i < c.documents; ++i) {
            DocumentRecord d = make_document(next_document_++, 1990 + static_cast<int>(rng_.index(28)));
            bool proceedings = rng_.chance(c.editor_document_rate);
            std::size_t n_people = proceedings ? 1 + rng_.index(3) : 1 + rng_.index(4);
            n_people = std::min(n_people, c.persons);
            std::vector<std::uint32_t> people;
            auto lead = static_cast<std::uint32_t>(rng_.index(c.persons));
            people.push_back(lead);
            std::size_t guard = 0;
            while (people.size() < n_people && guard++ < 100) {
                std::uint32_t q;
                if (rng_.chance(0.8)) {
                    std::size_t start = lead / block * block;
                    q = static_cast<std::uint32_t>(std::min(c.persons - 1, start + rng_.index(block)));
                } else {
                    q = static_cast<std::uint32_t>(rng_.index(c.persons));
                }
                if (std::find(people.begin(), people.end(), q) == people.end())
                    people.push_back(q);
            }
            Role role = proceedings ? Role::Editor : Role::Author;
            if (proceedings)
                d.title = "Proceedings of " + d.title;
            auto& names = proceedings ? d.editors : d.authors;
            for (std::size_t pos = 0; pos < people.size(); ++pos) {
                std::string s = surface_for(persons_[people[pos]]);
                names.push_back(s);
                person_mentions[people[pos]].push_back({d.key, static_cast<std::uint32_t>(pos), s, role});
            }
            doc_people_.push_back(std::move(people));
            docs.push_back(std::make_shared<const DocumentRecord>(std::move(d)));
        }

        std::map<std::string, std::vector<Signature>> profiles;
        std::vector<std::string> main_profile(c.persons);
        std::map<std::pair<char, std::uint32_t>, std::vector<std::uint32_t>> by_initial_last;
        for (std::uint32_t pi = 0; pi < c.persons; ++pi) {
            auto& ms = person_mentions[pi];
            if (ms.empty())
                continue;
            std::sort(ms.begin(), ms.end(), key_less);
            const Person& p = persons_[pi];
            auto bucket_key = std::make_pair(fn_[p.first][0], p.last);
            auto& bucket = by_initial_last[bucket_key];
            bool pooled = false;
            if (!bucket.empty() && rng_.chance(c.homonym_rate)) {
                std::uint32_t q = bucket[rng_.index(bucket.size())];
                auto& target = profiles[main_profile[q]];
                if (!share_document(target, ms)) {
                    target.insert(target.end(), ms.begin(), ms.end());
                    std::sort(target.begin(), target.end(), key_less);
                    homonym_profiles_.push_back(main_profile[q]);
                    pooled = true;
                }
            }
            if (pooled)
                continue;
            std::string id = fresh_profile();
            main_profile[pi] = id;
            bucket.push_back(pi);
            if (ms.size() >= 2 && rng_.chance(c.synonym_rate)) {
                std::vector<Signature> abbreviated, rest;
                for (auto& m : ms)
                    (m.surface.find(". ") == 1 ? abbreviated : rest).push_back(m);
                if (abbreviated.empty() || rest.empty()) {
                    abbreviated.assign(ms.begin(), ms.begin() + static_cast<std::ptrdiff_t>(ms.size() / 2));
                    rest.assign(ms.begin() + static_cast<std::ptrdiff_t>(ms.size() / 2), ms.end());
                }
                std::string other = fresh_profile();
                profiles[id] = std::move(rest);
                profiles[other] = std::move(abbreviated);
                synonym_pairs_.emplace_back(id, other);
            } else {
                profiles[id] = ms;
            }
        }
        rng_.shuffle(synonym_pairs_);
        std::sort(homonym_profiles_.begin(), homonym_profiles_.end());
        homonym_profiles_.erase(std::unique(homonym_profiles_.begin(), homonym_profiles_.end()),
                                homonym_profiles_.end());
        rng_.shuffle(homonym_profiles_);

        std::vector<ProfilePtr> ptrs;
        ptrs.reserve(profiles.size());
        for (auto& [id, ms] : profiles) {
            ptrs.push_back(std::make_shared<const Profile>(id, std::move(ms)));
            set_live(id, true);
        }
        return Snapshot(c.dates[0], std::move(ptrs), std::move(docs), std::move(venues));
    }

    const std::string& random_live() { return live_[rng_.index(live_.size())]; }

    [[noreturn]] void infeasible(EditKind k, std::size_t interval) {
        throw InfeasibleError("cannot place a " + std::string(edit_kind_name(k)) + " in interval " +
                              std::to_string(interval) + " (" + std::to_string(live_.size()) +
                              " populated profiles, isolation leaves too few candidates)");
    }

    EditRecord make(EditKind kind, std::size_t interval) {
        if (live_.empty())
            infeasible(kind, interval);
        switch (kind) {
        case EditKind::Merge: return make_merge(interval);
        case EditKind::Split: return make_split(interval);
        case EditKind::Distribute: return make_distribute(interval);
        case EditKind::Rename: return make_rename(interval);
        case EditKind::NewPublication: return make_publication(interval);
        }
        infeasible(kind, interval);
    }

    std::optional<std::pair<std::string, std::string>> next_synonym_pair() {
        while (synonym_cursor_ < synonym_pairs_.size()) {
            auto pr = synonym_pairs_[synonym_cursor_++];
            if (available(pr.first) && available(pr.second))
                return pr;
        }
        return std::nullopt;
    }

    EditRecord make_merge(std::size_t interval) {
        std::vector<std::string> group;
        if (auto pr = rng_.chance(0.7) ? next_synonym_pair() : std::nullopt; pr && !share_document(builder_->mentions(pr->first),
                                                                  builder_->mentions(pr->second)))
            group = {pr->first, pr->second};
        for (int a = 0; group.empty() && a < attempts; ++a) {
            std::size_t k = rng_.chance(0.8) ? 2 : 3;
            std::vector<std::string> g;
            for (std::size_t i = 0; i < k; ++i) {
                const std::string& id = random_live();
                if (!available(id) || std::find(g.begin(), g.end(), id) != g.end())
                    break;
                bool clash = false;
                for (const auto& o : g)
                    clash = clash || share_document(builder_->mentions(o), builder_->mentions(id));
                if (clash)
                    break;
                g.push_back(id);
            }
            if (g.size() == k)
                group = std::move(g);
        }
        if (group.empty())
            infeasible(EditKind::Merge, interval);
        std::sort(group.begin(), group.end());
        EditRecord e;
        e.kind = EditKind::Merge;
        e.sources = group;
        std::string survivor = rng_.chance(0.1) ? fresh_profile() : group[rng_.index(group.size())];
        for (const auto& id : group) {
            if (id == survivor)
                continue;
            for (const auto& m : builder_->mentions(id))
                e.moves.push_back({m.key(), id, survivor, std::nullopt});
        }
        e.targets = {survivor};
        return e;
    }

    EditRecord make_split(std::size_t interval) {
        std::string x;
        std::vector<Signature> out;
        while (homonym_cursor_ < homonym_profiles_.size() && x.empty()) {
            const std::string& id = homonym_profiles_[homonym_cursor_++];
            if (!available(id) || builder_->mentions(id).size() < 2)
                continue;
            std::map<std::uint32_t, std::vector<Signature>> by_person;
            for (const auto& m : builder_->mentions(id))
                by_person[person_of(m.key())].push_back(m);
            if (by_person.size() < 2)
                continue;
            x = id;
            out = std::prev(by_person.end())->second;
        }
        for (int a = 0; x.empty() && a < attempts; ++a) {
            const std::string& id = random_live();
            auto ms = builder_->mentions(id);
            if (!available(id) || ms.size() < 2)
                continue;
            std::vector<Signature> pick;
            for (const auto& m : ms)
                if (rng_.chance(0.5))
                    pick.push_back(m);
            if (pick.empty())
                pick.push_back(ms[rng_.index(ms.size())]);
            if (pick.size() == ms.size())
                pick.erase(pick.begin() + static_cast<std::ptrdiff_t>(rng_.index(pick.size())));
            x = id;
            out = std::move(pick);
        }
        if (x.empty())
            infeasible(EditKind::Split, interval);
        EditRecord e;
        e.kind = EditKind::Split;
        e.sources = {x};
        std::vector<std::string> fresh{fresh_profile()};
        if (out.size() >= 2 && rng_.chance(0.3))
            fresh.push_back(fresh_profile());
        for (std::size_t i = 0; i < out.size(); ++i) {
            // the first moved mention always goes to the first fresh profile
            const std::string& to = i == 0 ? fresh[0] : fresh[rng_.index(fresh.size())];
            std::optional<std::string> surface;
            if (rng_.chance(0.3))
                surface = strip_trailing_number(out[i].surface) + " " + numbered('0', 2 + rng_.index(98), 3);
            e.moves.push_back({out[i].key(), x, to, surface});
        }
        // every fresh target must receive a mention
        if (fresh.size() == 2 && std::none_of(e.moves.begin(), e.moves.end(),
                                              [&](const Move& m) { return m.to == fresh[1]; }))
            e.moves.back().to = fresh[1];
        e.targets = fresh;
        e.targets.push_back(x);
        std::sort(e.targets.begin(), e.targets.end());
        return e;
    }

    static std::string strip_trailing_number(const std::string& s) {
        auto sp = s.rfind(' ');
        if (sp != std::string::npos && s.size() - sp == 5 &&
            std::all_of(s.begin() + static_cast<std::ptrdiff_t>(sp) + 1, s.end(),
                        [](char ch) { return ch >= '0' && ch <= '9'; }))
            return s.substr(0, sp);
        return s;
    }

    EditRecord make_distribute(std::size_t interval) {
        auto movable = [&](const std::string& a, const std::string& b) {
            auto am = builder_->mentions(a);
            auto bm = builder_->mentions(b);
            std::vector<Signature> out;
            for (const auto& m : am)
                if (std::none_of(bm.begin(), bm.end(),
                                 [&](const Signature& s) { return s.document_key == m.document_key; }))
                    out.push_back(m);
            return out;
        };
        std::string a, b;
        std::vector<Signature> candidates;
        auto accept = [&](const std::string& x, const std::string& y) {
            if (x == y || !available(x) || !available(y) || builder_->mentions(x).size() < 2)
                return false;
            auto c = movable(x, y);
            if (c.empty())
                return false;
            a = x;
            b = y;
            candidates = std::move(c);
            return true;
        };
        if (auto pr = rng_.chance(0.7) ? next_synonym_pair() : std::nullopt) {
            if (!accept(pr->first, pr->second))
                accept(pr->second, pr->first);
        }
        for (int i = 0; a.empty() && i < attempts; ++i) {
            const std::string& x = random_live();
            const std::string& y = random_live();
            accept(x, y);
        }
        if (a.empty())
            infeasible(EditKind::Distribute, interval);
        std::size_t a_size = builder_->mentions(a).size();
        std::vector<Signature> move_ab;
        for (const auto& m : candidates)
            if (rng_.chance(0.5))
                move_ab.push_back(m);
        if (move_ab.empty())
            move_ab.push_back(candidates[rng_.index(candidates.size())]);
        if (move_ab.size() == a_size)
            move_ab.pop_back();
        EditRecord e;
        e.kind = EditKind::Distribute;
        e.sources = {a, b};
        std::sort(e.sources.begin(), e.sources.end());
        e.targets = e.sources;
        for (const auto& m : move_ab)
            e.moves.push_back({m.key(), a, b, std::nullopt});
        auto bm = builder_->mentions(b);
        if (bm.size() >= 2 && rng_.chance(0.3)) {
            const Signature& back = bm[rng_.index(bm.size())];
            auto am = builder_->mentions(a);
            bool clash = std::any_of(am.begin(), am.end(),
                                     [&](const Signature& s) { return s.document_key == back.document_key; });
            if (!clash)
                e.moves.push_back({back.key(), b, a, std::nullopt});
        }
        return e;
    }

    EditRecord make_rename(std::size_t interval) {
        std::string x;
        for (int a = 0; x.empty() && a < attempts; ++a) {
            const std::string& id = random_live();
            if (available(id))
                x = id;
        }
        if (x.empty())
            infeasible(EditKind::Rename, interval);
        EditRecord e;
        e.kind = EditKind::Rename;
        std::string to = fresh_profile();
        e.sources = {x};
        e.targets = {to};
        for (const auto& m : builder_->mentions(x))
            e.moves.push_back({m.key(), x, to, std::nullopt});
        return e;
    }

    EditRecord make_publication(std::size_t interval) {
        std::size_t want = 1 + rng_.index(4);
        std::vector<std::string> authors;
        for (int a = 0; authors.size() < want && a < attempts; ++a) {
            const std::string& id = random_live();
            if (available(id) && std::find(authors.begin(), authors.end(), id) == authors.end())
                authors.push_back(id);
        }
        if (authors.empty())
            infeasible(EditKind::NewPublication, interval);
        DocumentRecord d = make_document(next_document_++, 2018);
        std::vector<std::uint32_t> people;
        EditRecord e;
        e.kind = EditKind::NewPublication;
        for (std::size_t pos = 0; pos < authors.size(); ++pos) {
            auto ms = builder_->mentions(authors[pos]);
            std::string s = representative_surface(ms);
            d.authors.push_back(s);
            people.push_back(person_of(ms[0].key()));
            e.additions.push_back({authors[pos], Signature{d.key, static_cast<std::uint32_t>(pos), s, Role::Author}});
        }
        doc_people_.push_back(std::move(people));
        e.document = std::move(d);
        std::sort(authors.begin(), authors.end());
        e.sources = authors;
        e.targets = authors;
        return e;
    }
};

}  // namespace detail

/// Deterministic in the configuration: the same seed yields the same history
/// and log. Consecutive snapshots share unchanged records.
inline Generated generate(const GeneratorConfig& config) {
    detail::Generator g(config);
    return g.run();
}

}  // namespace corrhist
