#pragma once

// Case-based collection: for every correction a "before" and an "after" graph
// of Person, Document and Venue nodes around the corrected (primary) profiles.
//
// Context reaches one hop: the primary profiles, their documents, everyone
// else holding a mention on those documents, and the documents' venues.
// Relation weights count included documents that already existed at the last
// observation before the correction; document properties come from the most
// recent snapshot of the history.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "corrhist/extractor.hpp"
#include "corrhist/fsutil.hpp"
#include "corrhist/model.hpp"
#include "corrhist/parallel.hpp"
#include "corrhist/xml.hpp"

namespace corrhist {

enum class NodeLabel { Document, Person, Venue };

enum class EdgeType { Created, Contributed, CoCreated, CoContributed, CreatedAt, ContributedAt };

inline std::string_view label_name(NodeLabel l) {
    switch (l) {
    case NodeLabel::Document: return "DOCUMENT";
    case NodeLabel::Person: return "PERSON";
    case NodeLabel::Venue: return "VENUE";
    }
    return "?";
}

inline std::string_view edge_type_name(EdgeType t) {
    switch (t) {
    case EdgeType::Created: return "CREATED";
    case EdgeType::Contributed: return "CONTRIBUTED";
    case EdgeType::CoCreated: return "CO_CREATED";
    case EdgeType::CoContributed: return "CO_CONTRIBUTED";
    case EdgeType::CreatedAt: return "CREATED_AT";
    case EdgeType::ContributedAt: return "CONTRIBUTED_AT";
    }
    return "?";
}

inline std::optional<NodeLabel> parse_label(std::string_view s) {
    for (auto l : {NodeLabel::Document, NodeLabel::Person, NodeLabel::Venue})
        if (label_name(l) == s)
            return l;
    return std::nullopt;
}

inline std::optional<EdgeType> parse_edge_type(std::string_view s) {
    for (auto t : {EdgeType::Created, EdgeType::Contributed, EdgeType::CoCreated, EdgeType::CoContributed,
                   EdgeType::CreatedAt, EdgeType::ContributedAt})
        if (edge_type_name(t) == s)
            return t;
    return std::nullopt;
}

inline bool is_weighted(EdgeType t) { return t != EdgeType::Created && t != EdgeType::Contributed; }

struct Property {
    std::string key;
    std::string value;
    friend bool operator==(const Property&, const Property&) = default;
};

struct Node {
    NodeLabel label = NodeLabel::Person;
    std::string id;
    std::vector<Property> properties;
    bool primary = false;

    const std::string* property(std::string_view key) const {
        for (const auto& p : properties)
            if (p.key == key)
                return &p.value;
        return nullptr;
    }

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge {
    EdgeType type = EdgeType::Created;
    std::string from;
    std::string to;
    std::optional<std::uint32_t> weight;
    friend bool operator==(const Edge&, const Edge&) = default;
};

struct CaseGraph {
    std::vector<Node> nodes;
    std::vector<Edge> edges;

    std::set<std::string> primary_ids() const {
        std::set<std::string> out;
        for (const auto& n : nodes)
            if (n.primary)
                out.insert(n.id);
        return out;
    }

    const Node* find_node(std::string_view id) const {
        for (const auto& n : nodes)
            if (n.id == id)
                return &n;
        return nullptr;
    }

    const Edge* find_edge(EdgeType type, std::string_view from, std::string_view to) const {
        for (const auto& e : edges)
            if (e.type == type && e.from == from && e.to == to)
                return &e;
        return nullptr;
    }

    /// Canonical order: nodes by (label, id), edges by (type, from, to).
    void normalize() {
        std::sort(nodes.begin(), nodes.end(),
                  [](const Node& a, const Node& b) { return std::tie(a.label, a.id) < std::tie(b.label, b.id); });
        std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.type, a.from, a.to) < std::tie(b.type, b.from, b.to);
        });
    }

    /// First violated invariant, if any.
    std::optional<std::string> problem() const {
        std::unordered_map<std::string_view, NodeLabel> label_of;
        for (const auto& n : nodes) {
            if (n.id.empty())
                return "node with empty id";
            if (!label_of.emplace(n.id, n.label).second)
                return "duplicate node id '" + n.id + "'";
            if (n.primary && n.label != NodeLabel::Person)
                return "primary node '" + n.id + "' is not a PERSON";
            std::set<std::string_view> keys;
            for (const auto& p : n.properties)
                if (!keys.insert(p.key).second)
                    return "node '" + n.id + "' repeats property '" + p.key + "'";
        }
        std::set<std::tuple<EdgeType, std::string_view, std::string_view>> seen;
        for (const auto& e : edges) {
            std::string what = std::string(edge_type_name(e.type)) + " edge " + e.from + " -> " + e.to;
            auto f = label_of.find(e.from);
            auto t = label_of.find(e.to);
            if (f == label_of.end() || t == label_of.end())
                return what + " has a dangling endpoint";
            if (e.from == e.to)
                return what + " is a self-loop";
            if (!seen.emplace(e.type, e.from, e.to).second)
                return what + " is repeated";
            NodeLabel want_to = NodeLabel::Person;
            switch (e.type) {
            case EdgeType::Created:
            case EdgeType::Contributed: want_to = NodeLabel::Document; break;
            case EdgeType::CoCreated:
            case EdgeType::CoContributed: want_to = NodeLabel::Person; break;
            case EdgeType::CreatedAt:
            case EdgeType::ContributedAt: want_to = NodeLabel::Venue; break;
            }
            if (f->second != NodeLabel::Person || t->second != want_to)
                return what + " connects the wrong node labels";
            if ((e.type == EdgeType::CoCreated || e.type == EdgeType::CoContributed) && !(e.from < e.to))
                return what + " must be stored with from < to";
            if (is_weighted(e.type) && (!e.weight || *e.weight == 0))
                return what + " needs a positive weight";
            if (!is_weighted(e.type) && e.weight)
                return what + " must not carry a weight";
        }
        return std::nullopt;
    }

    friend bool operator==(const CaseGraph&, const CaseGraph&) = default;
};

inline std::string serialize_case_graph(const CaseGraph& g) {
    std::string out(xml::declaration);
    if (g.nodes.empty() && g.edges.empty()) {
        out += "<graph/>\n";
        return out;
    }
    out += "<graph>\n";
    for (const auto& n : g.nodes) {
        out += "<node";
        xml::put_attr(out, "label", label_name(n.label));
        xml::put_attr(out, "id", n.id);
        if (n.primary)
            out += " primary=\"true\"";
        if (n.properties.empty()) {
            out += "/>\n";
            continue;
        }
        out += ">\n";
        for (const auto& p : n.properties) {
            out += "     <property";
            xml::put_attr(out, "key", p.key);
            xml::put_attr(out, "value", p.value);
            out += "/>\n";
        }
        out += "</node>\n";
    }
    for (const auto& e : g.edges) {
        out += "<edge";
        xml::put_attr(out, "type", edge_type_name(e.type));
        xml::put_attr(out, "from", e.from);
        xml::put_attr(out, "to", e.to);
        if (e.weight)
            out += " weight=\"" + std::to_string(*e.weight) + "\"";
        out += "/>\n";
    }
    out += "</graph>\n";
    return out;
}

inline CaseGraph parse_case_graph(std::string_view bytes) {
    using Ev = xml::Reader::Event;
    xml::Reader r(xml::auto_decompress(std::make_unique<xml::StringSource>(bytes)));
    Ev e = r.next();
    while (e == Ev::Text)
        e = r.next();
    if (e != Ev::Start || r.name() != "graph")
        r.fail("expected <graph> root element");
    CaseGraph g;
    for (;;) {
        e = r.next();
        if (e == Ev::Text)
            continue;
        if (e == Ev::End)
            break;
        if (r.name() == "node") {
            r.only_attributes({"label", "id", "primary"});
            Node n;
            auto label = parse_label(r.require("label"));
            if (!label)
                r.fail("unknown node label '" + r.require("label") + "'");
            n.label = *label;
            n.id = r.require("id");
            if (const std::string* p = r.attribute("primary")) {
                if (*p != "true" && *p != "false")
                    r.fail("primary must be true or false");
                n.primary = *p == "true";
            }
            for (;;) {
                e = r.next();
                if (e == Ev::Text)
                    continue;
                if (e == Ev::End)
                    break;
                if (r.name() != "property")
                    r.fail("unexpected element <" + r.name() + "> in <node>");
                r.only_attributes({"key", "value"});
                n.properties.push_back({r.require("key"), r.require("value")});
                r.skip_element();
            }
            g.nodes.push_back(std::move(n));
        } else if (r.name() == "edge") {
            r.only_attributes({"type", "from", "to", "weight"});
            Edge ed;
            auto type = parse_edge_type(r.require("type"));
            if (!type)
                r.fail("unknown edge type '" + r.require("type") + "'");
            ed.type = *type;
            ed.from = r.require("from");
            ed.to = r.require("to");
            if (const std::string* w = r.attribute("weight")) {
                ed.weight = r.parse_int<std::uint32_t>(*w, "weight");
                if (*ed.weight == 0)
                    r.fail("edge weight must be positive");
            }
            r.skip_element();
            g.edges.push_back(std::move(ed));
        } else {
            r.fail("unexpected element <" + r.name() + "> in <graph>");
        }
    }
    while (r.next() != Ev::Eof) {
    }
    if (auto p = g.problem())
        throw ParseError("invalid graph: " + *p, r.offset());
    g.normalize();
    return g;
}

/// Holders of the mentions on a chosen set of documents in one snapshot.
class DocumentOwners {
public:
    struct Owner {
        std::uint32_t position;
        Role role;
        std::string_view profile;
    };

    DocumentOwners() = default;

    DocumentOwners(const Snapshot& s, const std::set<std::string>& documents) : snapshot_(s) {
        std::unordered_set<std::string_view> wanted(documents.begin(), documents.end());
        for (const auto& doc : documents)
            owners_[doc];
        for (const auto& p : s.profiles())
            for (const auto& m : p->mentions())
                if (wanted.count(m.document_key))
                    owners_[m.document_key].push_back({m.position, m.role, p->id()});
        for (auto& [_, v] : owners_)
            std::sort(v.begin(), v.end(), [](const Owner& a, const Owner& b) {
                return std::tie(a.role, a.position) < std::tie(b.role, b.position);
            });
    }

    std::span<const Owner> of(std::string_view doc) const {
        auto it = owners_.find(doc);
        if (it == owners_.end())
            throw Error("document '" + std::string(doc) + "' was not indexed");
        return it->second;
    }

    const Snapshot& snapshot() const noexcept { return snapshot_; }

private:
    Snapshot snapshot_;
    std::map<std::string, std::vector<Owner>, std::less<>> owners_;
};

namespace detail {

inline std::set<std::string> documents_of(const std::map<std::string, std::vector<Signature>>& profiles) {
    std::set<std::string> docs;
    for (const auto& [_, ms] : profiles)
        for (const auto& m : ms)
            docs.insert(m.document_key);
    return docs;
}

/// Graph around `primaries` with mention ownership read from `owners`'
/// snapshot, weights restricted to documents present in `weights`, document
/// properties from `latest`.
inline CaseGraph build_graph(const std::map<std::string, std::vector<Signature>>& primaries,
                             const DocumentOwners& owners, const Snapshot& weights, const Snapshot& latest) {
    const Snapshot& state = owners.snapshot();
    std::map<std::string, Node> people;
    std::map<std::string, Node> documents;
    std::map<std::string, Node> venues;
    std::set<std::tuple<EdgeType, std::string, std::string>> plain;
    std::map<std::tuple<EdgeType, std::string, std::string>, std::uint32_t> weighted;

    auto person = [&](std::string_view id) {
        auto it = people.find(std::string(id));
        if (it != people.end())
            return;
        const Profile* p = state.find_profile(id);
        if (!p)
            throw IntegrityError("profile '" + std::string(id) + "' not found at " + state.date().str());
        Node n{NodeLabel::Person, std::string(id), {}, false};
        n.properties.push_back({"name", representative_surface(p->mentions())});
        people.emplace(n.id, std::move(n));
    };

    for (const auto& [id, _] : primaries) {
        person(id);
        people.at(id).primary = true;
    }

    for (const auto& key : documents_of(primaries)) {
        const DocumentRecord* rec = state.find_document(key);
        if (!rec)
            throw IntegrityError("document '" + key + "' not found at " + state.date().str());
        const DocumentRecord* props = latest.find_document(key);
        if (!props)
            props = rec;
        Node dn{NodeLabel::Document, key, {}, false};
        dn.properties.push_back({"year", std::to_string(props->year)});
        dn.properties.push_back({"title", props->title});
        if (props->venue_key)
            dn.properties.push_back({"venue", *props->venue_key});
        if (props->link)
            dn.properties.push_back({"link", *props->link});
        documents.emplace(key, std::move(dn));

        if (rec->venue_key && !venues.count(*rec->venue_key)) {
            Node vn{NodeLabel::Venue, *rec->venue_key, {}, false};
            vn.properties.push_back({"name", state.venue_name(*rec->venue_key).value_or("")});
            venues.emplace(vn.id, std::move(vn));
        }

        const bool counted = weights.find_document(key) != nullptr;
        for (Role role : {Role::Author, Role::Editor}) {
            std::set<std::string_view> holders;
            for (const auto& o : owners.of(key))
                if (o.role == role)
                    holders.insert(o.profile);
            const EdgeType link_type = role == Role::Author ? EdgeType::Created : EdgeType::Contributed;
            const EdgeType co_type = role == Role::Author ? EdgeType::CoCreated : EdgeType::CoContributed;
            const EdgeType at_type = role == Role::Author ? EdgeType::CreatedAt : EdgeType::ContributedAt;
            for (auto x : holders) {
                person(x);
                plain.emplace(link_type, std::string(x), key);
                if (!counted)
                    continue;
                if (rec->venue_key)
                    ++weighted[{at_type, std::string(x), *rec->venue_key}];
                for (auto y : holders)
                    if (x < y)
                        ++weighted[{co_type, std::string(x), std::string(y)}];
            }
        }
    }

    CaseGraph g;
    for (auto* group : {&documents, &people, &venues})
        for (auto& [_, n] : *group)
            g.nodes.push_back(std::move(n));
    for (const auto& [type, from, to] : plain)
        g.edges.push_back({type, from, to, std::nullopt});
    for (const auto& [k, w] : weighted)
        g.edges.push_back({std::get<0>(k), std::get<1>(k), std::get<2>(k), w});
    g.normalize();
    if (auto p = g.problem())
        throw IntegrityError("case graph: " + *p);
    return g;
}

}  // namespace detail

struct CaseGraphPair {
    CaseGraph before;
    CaseGraph after;
};

/// Before-graph from t_before membership, after-graph from t_after membership.
inline CaseGraphPair build_case_graphs(const CorrectionCase& c, const History& h) {
    const Snapshot& before = h.at(c.t_before);
    const Snapshot& after = h.at(c.t_after);
    DocumentOwners owners_before(before, detail::documents_of(c.source_profiles));
    DocumentOwners owners_after(after, detail::documents_of(c.target_profiles));
    return {detail::build_graph(c.source_profiles, owners_before, before, h.latest()),
            detail::build_graph(c.target_profiles, owners_after, before, h.latest())};
}

struct ManifestEntry {
    std::string case_id;
    CorrectionKind kind = CorrectionKind::Merge;
    Date t_before;
    Date t_after;
    std::size_t profiles = 0;
    std::string before_file;
    std::string after_file;
    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

inline std::string manifest_tsv(const std::vector<ManifestEntry>& entries) {
    std::ostringstream out;
    out << "case_id\tkind\tt_before\tt_after\tprofiles\tbefore\tafter\n";
    for (const auto& e : entries)
        out << e.case_id << '\t' << kind_name(e.kind) << '\t' << e.t_before << '\t' << e.t_after << '\t'
            << e.profiles << '\t' << e.before_file << '\t' << e.after_file << '\n';
    return out.str();
}

/// Writes `<case-id>-before.xml` and `<case-id>-after.xml` for every case
/// plus `manifest.tsv`. Output bytes do not depend on `parallel`.
inline std::vector<ManifestEntry> build_case_collection(
    const std::vector<CorrectionCase>& cases, const History& h, const std::filesystem::path& out_dir,
    unsigned parallel = 1, const std::optional<std::filesystem::path>& staging = std::nullopt) {
    ensure_directory(out_dir);
    auto ids = case_ids(cases);

    // One restricted ownership index per observation time in use.
    std::map<Date, std::set<std::string>> wanted;
    for (const auto& c : cases) {
        auto b = detail::documents_of(c.source_profiles);
        wanted[c.t_before].insert(b.begin(), b.end());
        auto a = detail::documents_of(c.target_profiles);
        wanted[c.t_after].insert(a.begin(), a.end());
    }
    std::vector<Date> times;
    for (const auto& [t, _] : wanted)
        times.push_back(t);
    std::vector<DocumentOwners> indices(times.size());
    parallel_for(times.size(), parallel,
                 [&](std::size_t i) { indices[i] = DocumentOwners(h.at(times[i]), wanted.at(times[i])); });
    auto index_at = [&](const Date& t) -> const DocumentOwners& {
        return indices[static_cast<std::size_t>(std::lower_bound(times.begin(), times.end(), t) - times.begin())];
    };

    std::vector<ManifestEntry> entries(cases.size());
    parallel_for(cases.size(), parallel, [&](std::size_t i) {
        const auto& c = cases[i];
        const Snapshot& before = h.at(c.t_before);
        CaseGraph gb = detail::build_graph(c.source_profiles, index_at(c.t_before), before, h.latest());
        CaseGraph ga = detail::build_graph(c.target_profiles, index_at(c.t_after), before, h.latest());
        ManifestEntry e{ids[i], c.kind, c.t_before, c.t_after, c.profile_ids().size(), ids[i] + "-before.xml",
                        ids[i] + "-after.xml"};
        write_file(out_dir / e.before_file, serialize_case_graph(gb), staging);
        write_file(out_dir / e.after_file, serialize_case_graph(ga), staging);
        entries[i] = std::move(e);
    });
    write_file(out_dir / "manifest.tsv", manifest_tsv(entries), staging);
    return entries;
}

}  // namespace corrhist
