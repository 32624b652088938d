#pragma once

// Domain model: mentions (signatures), profiles, document records, snapshots
// and histories. All types are immutable after construction.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "corrhist/date.hpp"
#include "corrhist/errors.hpp"

namespace corrhist {

enum class Role : std::uint8_t { Author, Editor };

inline std::string_view role_name(Role r) { return r == Role::Author ? "author" : "editor"; }

/// Identity of a mention inside one snapshot. Surfaces are payload, not identity.
struct MentionKey {
    std::string document_key;
    std::uint32_t position = 0;
    Role role = Role::Author;

    friend bool operator==(const MentionKey&, const MentionKey&) = default;
    friend auto operator<=>(const MentionKey&, const MentionKey&) = default;
};

/// Non-owning MentionKey for hashing against live snapshot data.
struct MentionRef {
    std::string_view document_key;
    std::uint32_t position = 0;
    Role role = Role::Author;

    friend bool operator==(const MentionRef&, const MentionRef&) = default;
};

struct MentionRefHash {
    std::size_t operator()(const MentionRef& m) const noexcept {
        std::size_t h = std::hash<std::string_view>{}(m.document_key);
        h ^= (static_cast<std::size_t>(m.position) << 1 | static_cast<std::size_t>(m.role)) + 0x9e3779b97f4a7c15ULL +
             (h << 6) + (h >> 2);
        return h;
    }
};

struct Signature {
    std::string document_key;
    std::uint32_t position = 0;
    std::string surface;
    Role role = Role::Author;

    MentionKey key() const { return {document_key, position, role}; }
    MentionRef ref() const { return {document_key, position, role}; }

    friend bool operator==(const Signature&, const Signature&) = default;
};

inline bool key_less(const Signature& a, const Signature& b) {
    if (int c = a.document_key.compare(b.document_key); c != 0)
        return c < 0;
    if (a.position != b.position)
        return a.position < b.position;
    return a.role < b.role;
}

inline bool same_key(const Signature& a, const Signature& b) {
    return a.document_key == b.document_key && a.position == b.position && a.role == b.role;
}

inline std::string trim(std::string_view s) {
    auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
    while (!s.empty() && ws(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && ws(s.back()))
        s.remove_suffix(1);
    return std::string(s);
}

/// A library's interpretation of which mentions belong to one person.
class Profile {
public:
    Profile(std::string id, std::vector<Signature> mentions) : id_(std::move(id)), mentions_(std::move(mentions)) {
        if (id_.empty())
            throw IntegrityError("profile with empty identifier");
        std::sort(mentions_.begin(), mentions_.end(), key_less);
        for (std::size_t i = 0; i < mentions_.size(); ++i) {
            const auto& m = mentions_[i];
            if (m.document_key.empty())
                throw IntegrityError("profile '" + id_ + "' has a signature with empty document key");
            if (trim(m.surface).empty())
                throw IntegrityError("profile '" + id_ + "' has an empty surface on '" + m.document_key + "'");
            if (i > 0 && same_key(mentions_[i - 1], m))
                throw IntegrityError("profile '" + id_ + "' lists mention (" + m.document_key + ", " +
                                     std::to_string(m.position) + ") twice");
        }
    }

    const std::string& id() const noexcept { return id_; }
    std::span<const Signature> mentions() const noexcept { return mentions_; }
    bool empty() const noexcept { return mentions_.empty(); }
    std::size_t size() const noexcept { return mentions_.size(); }

    const Signature* find(const MentionRef& key) const {
        Signature probe{std::string(key.document_key), key.position, {}, key.role};
        auto it = std::lower_bound(mentions_.begin(), mentions_.end(), probe, key_less);
        if (it != mentions_.end() && same_key(*it, probe))
            return &*it;
        return nullptr;
    }

    /// True when both profiles hold the same mention keys (surfaces may differ).
    bool same_mentions(const Profile& other) const {
        return std::equal(mentions_.begin(), mentions_.end(), other.mentions_.begin(), other.mentions_.end(),
                          same_key);
    }

    friend bool operator==(const Profile&, const Profile&) = default;

private:
    std::string id_;
    std::vector<Signature> mentions_;
};

using ProfilePtr = std::shared_ptr<const Profile>;

struct DocumentRecord {
    std::string key;
    std::string title;
    int year = 0;
    std::optional<std::string> venue_key;
    std::vector<std::string> authors;
    std::vector<std::string> editors;
    std::optional<std::string> link;

    const std::vector<std::string>& names(Role r) const { return r == Role::Author ? authors : editors; }

    friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

using DocumentPtr = std::shared_ptr<const DocumentRecord>;

/// State of the collection at one observation date.
///
/// Profiles and documents are held through shared pointers so that consecutive
/// snapshots of a history can share unchanged records; see share_with().
class Snapshot {
public:
    Snapshot() : data_(std::make_shared<Data>()) {}

    Snapshot(Date date, std::vector<ProfilePtr> profiles, std::vector<DocumentPtr> documents,
             std::map<std::string, std::string> venues = {}) {
        auto d = std::make_shared<Data>();
        d->date = std::move(date);
        d->profiles = std::move(profiles);
        d->documents = std::move(documents);
        d->venues = std::move(venues);
        std::sort(d->profiles.begin(), d->profiles.end(),
                  [](const ProfilePtr& a, const ProfilePtr& b) { return a->id() < b->id(); });
        std::sort(d->documents.begin(), d->documents.end(),
                  [](const DocumentPtr& a, const DocumentPtr& b) { return a->key < b->key; });
        validate(*d);
        data_ = std::move(d);
    }

    const Date& date() const noexcept { return data_->date; }
    std::span<const ProfilePtr> profiles() const noexcept { return data_->profiles; }
    std::span<const DocumentPtr> documents() const noexcept { return data_->documents; }
    const std::map<std::string, std::string>& venues() const noexcept { return data_->venues; }

    ProfilePtr profile_ptr(std::string_view id) const {
        const auto& v = data_->profiles;
        auto it = std::lower_bound(v.begin(), v.end(), id,
                                   [](const ProfilePtr& p, std::string_view k) { return p->id() < k; });
        return it != v.end() && (*it)->id() == id ? *it : nullptr;
    }
    const Profile* find_profile(std::string_view id) const { return profile_ptr(id).get(); }

    DocumentPtr document_ptr(std::string_view key) const {
        const auto& v = data_->documents;
        auto it = std::lower_bound(v.begin(), v.end(), key,
                                   [](const DocumentPtr& p, std::string_view k) { return p->key < k; });
        return it != v.end() && (*it)->key == key ? *it : nullptr;
    }
    const DocumentRecord* find_document(std::string_view key) const { return document_ptr(key).get(); }

    std::optional<std::string> venue_name(std::string_view key) const {
        auto it = data_->venues.find(std::string(key));
        if (it == data_->venues.end())
            return std::nullopt;
        return it->second;
    }

    std::size_t mention_count() const {
        std::size_t n = 0;
        for (const auto& p : data_->profiles)
            n += p->size();
        return n;
    }

    /// Same content under a different observation date.
    Snapshot with_date(Date date) const {
        auto d = std::make_shared<Data>(*data_);
        d->date = std::move(date);
        return Snapshot(std::move(d));
    }

    /// Equal snapshot whose profiles and documents reuse `previous`'s records
    /// wherever they are structurally equal.
    Snapshot share_with(const Snapshot& previous) const {
        auto d = std::make_shared<Data>(*data_);
        share_sorted(d->profiles, previous.data_->profiles, [](const auto& p) -> const auto& { return p->id(); });
        share_sorted(d->documents, previous.data_->documents, [](const auto& p) -> const auto& { return p->key; });
        return Snapshot(std::move(d));
    }

    /// This snapshot with the profiles in `changed` replaced (an empty list
    /// removes the profile) and `added` documents appended, at `date`.
    /// Unchanged records are shared. Only the changed part is validated unless
    /// a changed profile gains a mention on a pre-existing document that it
    /// did not hold before; then the whole result is checked.
    Snapshot derive(Date date, const std::map<std::string, std::vector<Signature>>& changed,
                    std::vector<DocumentPtr> added = {}) const {
        const Data& base = *data_;
        auto d = std::make_shared<Data>();
        d->date = std::move(date);
        d->venues = base.venues;
        std::sort(added.begin(), added.end(), [](const DocumentPtr& a, const DocumentPtr& b) { return a->key < b->key; });
        for (std::size_t i = 0; i < added.size(); ++i) {
            if (find_document(added[i]->key) || (i > 0 && added[i - 1]->key == added[i]->key))
                throw IntegrityError("duplicate document '" + added[i]->key + "'");
            if (added[i]->key.empty())
                throw IntegrityError("document with empty key");
            if (added[i]->venue_key && !base.venues.count(*added[i]->venue_key))
                throw IntegrityError("document '" + added[i]->key + "' references unknown venue '" +
                                     *added[i]->venue_key + "'");
        }
        d->documents.reserve(base.documents.size() + added.size());
        std::merge(base.documents.begin(), base.documents.end(), added.begin(), added.end(),
                   std::back_inserter(d->documents),
                   [](const DocumentPtr& a, const DocumentPtr& b) { return a->key < b->key; });

        d->profiles.reserve(base.profiles.size() + changed.size());
        std::unordered_map<MentionRef, const std::string*, MentionRefHash> claimed;
        std::unordered_set<MentionRef, MentionRefHash> held_before;
        for (const auto& [id, _] : changed)
            if (const Profile* old = find_profile(id))
                for (const auto& m : old->mentions())
                    held_before.insert(m.ref());
        bool full_check = false;
        auto bi = base.profiles.begin();
        auto ci = changed.begin();
        while (bi != base.profiles.end() || ci != changed.end()) {
            if (ci == changed.end() || (bi != base.profiles.end() && (*bi)->id() < ci->first)) {
                d->profiles.push_back(*bi++);
                continue;
            }
            if (bi != base.profiles.end() && (*bi)->id() == ci->first)
                ++bi;
            if (!ci->second.empty()) {
                auto p = std::make_shared<const Profile>(ci->first, ci->second);
                d->profiles.push_back(p);
            }
            ++ci;
        }
        auto find_new_doc = [&](std::string_view key) -> const DocumentRecord* {
            auto it = std::lower_bound(d->documents.begin(), d->documents.end(), key,
                                       [](const DocumentPtr& p, std::string_view k) { return p->key < k; });
            return it != d->documents.end() && (*it)->key == key ? it->get() : nullptr;
        };
        for (const auto& p : d->profiles) {
            auto c = changed.find(p->id());
            if (c == changed.end())
                continue;
            for (const auto& m : p->mentions()) {
                const DocumentRecord* doc = find_new_doc(m.document_key);
                if (!doc)
                    throw IntegrityError("profile '" + p->id() + "' references unknown document '" + m.document_key +
                                         "'");
                if (m.position >= doc->names(m.role).size())
                    throw IntegrityError("profile '" + p->id() + "' references " + std::string(role_name(m.role)) +
                                         " position " + std::to_string(m.position) + " beyond the list of '" +
                                         m.document_key + "'");
                auto [it, inserted] = claimed.emplace(m.ref(), &p->id());
                if (!inserted)
                    throw IntegrityError("mention (" + m.document_key + ", " + std::to_string(m.position) + ", " +
                                         std::string(role_name(m.role)) + ") is claimed by profiles '" +
                                         *it->second + "' and '" + p->id() + "'");
                if (!held_before.count(m.ref()) && find_document(m.document_key))
                    full_check = true;
            }
        }
        if (full_check)
            validate(*d);
        return Snapshot(std::move(d));
    }

    friend bool operator==(const Snapshot& a, const Snapshot& b) {
        if (a.data_ == b.data_)
            return true;
        const Data& x = *a.data_;
        const Data& y = *b.data_;
        auto deref_eq = [](const auto& p, const auto& q) { return p == q || *p == *q; };
        return x.date == y.date && x.venues == y.venues &&
               std::equal(x.profiles.begin(), x.profiles.end(), y.profiles.begin(), y.profiles.end(), deref_eq) &&
               std::equal(x.documents.begin(), x.documents.end(), y.documents.begin(), y.documents.end(), deref_eq);
    }

private:
    struct Data {
        Date date;
        std::vector<ProfilePtr> profiles;
        std::vector<DocumentPtr> documents;
        std::map<std::string, std::string> venues;
    };

    explicit Snapshot(std::shared_ptr<const Data> d) : data_(std::move(d)) {}

    template <typename Ptr, typename KeyOf>
    static void share_sorted(std::vector<Ptr>& mine, const std::vector<Ptr>& theirs, KeyOf key_of) {
        auto it = theirs.begin();
        for (auto& p : mine) {
            while (it != theirs.end() && key_of(*it) < key_of(p))
                ++it;
            if (it != theirs.end() && key_of(*it) == key_of(p) && (*it == p || **it == *p))
                p = *it;
        }
    }

    static void validate(const Data& d) {
        for (std::size_t i = 1; i < d.profiles.size(); ++i)
            if (d.profiles[i - 1]->id() == d.profiles[i]->id())
                throw IntegrityError("duplicate profile '" + d.profiles[i]->id() + "'");
        for (std::size_t i = 0; i < d.documents.size(); ++i) {
            const auto& doc = *d.documents[i];
            if (doc.key.empty())
                throw IntegrityError("document with empty key");
            if (i > 0 && d.documents[i - 1]->key == doc.key)
                throw IntegrityError("duplicate document '" + doc.key + "'");
            if (doc.venue_key && !d.venues.count(*doc.venue_key))
                throw IntegrityError("document '" + doc.key + "' references unknown venue '" + *doc.venue_key + "'");
        }
        // one claim slot per (document, role, position); authors precede editors
        std::vector<std::size_t> offset(d.documents.size() + 1, 0);
        for (std::size_t i = 0; i < d.documents.size(); ++i)
            offset[i + 1] = offset[i] + d.documents[i]->authors.size() + d.documents[i]->editors.size();
        std::vector<const std::string*> claim(offset.back(), nullptr);
        auto find_doc = [&](std::string_view key) -> std::ptrdiff_t {
            auto it = std::lower_bound(d.documents.begin(), d.documents.end(), key,
                                       [](const DocumentPtr& p, std::string_view k) { return p->key < k; });
            return it != d.documents.end() && (*it)->key == key ? it - d.documents.begin() : -1;
        };
        for (const auto& p : d.profiles) {
            std::ptrdiff_t di = -1;
            for (const auto& m : p->mentions()) {
                if (di < 0 || d.documents[static_cast<std::size_t>(di)]->key != m.document_key)
                    di = find_doc(m.document_key);
                if (di < 0)
                    throw IntegrityError("profile '" + p->id() + "' references unknown document '" + m.document_key +
                                         "'");
                const DocumentRecord& doc = *d.documents[static_cast<std::size_t>(di)];
                if (m.position >= doc.names(m.role).size())
                    throw IntegrityError("profile '" + p->id() + "' references " + std::string(role_name(m.role)) +
                                         " position " + std::to_string(m.position) + " beyond the list of '" +
                                         m.document_key + "'");
                std::size_t slot = offset[static_cast<std::size_t>(di)] + m.position +
                                   (m.role == Role::Editor ? doc.authors.size() : 0);
                if (claim[slot])
                    throw IntegrityError("mention (" + m.document_key + ", " + std::to_string(m.position) + ", " +
                                         std::string(role_name(m.role)) + ") is claimed by profiles '" +
                                         *claim[slot] + "' and '" + p->id() + "'");
                claim[slot] = &p->id();
            }
        }
    }

    std::shared_ptr<const Data> data_;
};

/// Ordered sequence of observations.
class History {
public:
    explicit History(std::vector<Snapshot> snapshots) : snapshots_(std::move(snapshots)) {
        if (snapshots_.empty())
            throw Error("a history needs at least one snapshot");
        for (std::size_t i = 1; i < snapshots_.size(); ++i)
            if (!(snapshots_[i - 1].date() < snapshots_[i].date()))
                throw OrderError("snapshot dates not strictly increasing: " + snapshots_[i - 1].date().str() +
                                 " then " + snapshots_[i].date().str());
    }

    std::span<const Snapshot> snapshots() const noexcept { return snapshots_; }
    std::size_t size() const noexcept { return snapshots_.size(); }
    const Snapshot& operator[](std::size_t i) const { return snapshots_[i]; }
    const Snapshot& latest() const { return snapshots_.back(); }

    std::optional<std::size_t> index_of(const Date& t) const {
        auto it = std::lower_bound(snapshots_.begin(), snapshots_.end(), t,
                                   [](const Snapshot& s, const Date& d) { return s.date() < d; });
        if (it == snapshots_.end() || it->date() != t)
            return std::nullopt;
        return static_cast<std::size_t>(it - snapshots_.begin());
    }

    const Snapshot& at(const Date& t) const {
        auto i = index_of(t);
        if (!i)
            throw UnobservedTimeError("no observation at " + t.str());
        return snapshots_[*i];
    }

    friend bool operator==(const History&, const History&) = default;

private:
    std::vector<Snapshot> snapshots_;
};

/// p<t>: the mentions assigned to `profile_id` at observation `t`; empty if
/// the profile does not exist then.
inline std::vector<Signature> mentions_of(const History& history, std::string_view profile_id, const Date& t) {
    const Profile* p = history.at(t).find_profile(profile_id);
    if (!p)
        return {};
    return {p->mentions().begin(), p->mentions().end()};
}

/// Most frequent surface among `mentions`; ties go to the lexicographically
/// smallest. Empty input yields an empty string.
inline std::string representative_surface(std::span<const Signature> mentions) {
    std::map<std::string_view, std::size_t> freq;
    for (const auto& m : mentions)
        ++freq[m.surface];
    std::string_view best;
    std::size_t best_n = 0;
    for (const auto& [s, n] : freq)
        if (n > best_n) {
            best = s;
            best_n = n;
        }
    return std::string(best);
}

}  // namespace corrhist
