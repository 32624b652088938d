#pragma once

// Embedded collection: the full collection at t1 in canonical snapshot form,
// plus annotations of the defects that are corrected by t2.
//
// Observations that far apart can fold several corrections into one, so every
// annotation is marked coalesced="possible".

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "corrhist/extractor.hpp"
#include "corrhist/fsutil.hpp"
#include "corrhist/ingest.hpp"
#include "corrhist/xml.hpp"

namespace corrhist {

struct EmbeddedAnnotation {
    std::string case_id;
    CorrectionKind kind = CorrectionKind::Merge;
    std::map<std::string, std::vector<Signature>> source;
    std::map<std::string, std::vector<Signature>> target;
    std::set<MentionKey> new_mentions;
    bool coalesced_possible = true;

    friend bool operator==(const EmbeddedAnnotation&, const EmbeddedAnnotation&) = default;
};

struct AnnotationFile {
    Date t1;
    Date t2;
    std::vector<EmbeddedAnnotation> annotations;

    friend bool operator==(const AnnotationFile&, const AnnotationFile&) = default;
};

inline EmbeddedAnnotation make_annotation(const CorrectionCase& c, std::string case_id) {
    EmbeddedAnnotation a;
    a.case_id = std::move(case_id);
    a.kind = c.kind;
    a.source = c.source_profiles;
    a.target = c.target_profiles;
    a.new_mentions = c.new_mentions;
    for (auto* side : {&a.source, &a.target})
        for (auto& [_, ms] : *side)
            std::sort(ms.begin(), ms.end(), key_less);
    return a;
}

namespace detail {

inline void write_annotation(std::string& out, const EmbeddedAnnotation& a, const std::string& indent) {
    out += indent + "<case";
    xml::put_attr(out, "id", a.case_id);
    xml::put_attr(out, "kind", kind_name(a.kind));
    if (a.coalesced_possible)
        out += " coalesced=\"possible\"";
    out += ">\n";
    auto side = [&](std::string_view tag, const std::map<std::string, std::vector<Signature>>& profiles,
                    bool flag_new) {
        out += indent + "  <" + std::string(tag) + ">\n";
        for (const auto& [id, ms] : profiles) {
            out += indent + "    <profile";
            xml::put_attr(out, "authorid", id);
            out += ">\n";
            for (const auto& m : ms)
                write_signature(out, m, indent + "      ", flag_new && a.new_mentions.count(m.key()) > 0);
            out += indent + "    </profile>\n";
        }
        out += indent + "  </" + std::string(tag) + ">\n";
    };
    side("source", a.source, false);
    side("target", a.target, true);
    out += indent + "</case>\n";
}

/// Reads a <case> element whose start tag is current.
inline EmbeddedAnnotation read_annotation(xml::Reader& r) {
    using Ev = xml::Reader::Event;
    r.only_attributes({"id", "kind", "coalesced"});
    EmbeddedAnnotation a;
    a.case_id = r.require("id");
    try {
        a.kind = parse_kind(r.require("kind"));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        r.fail(e.what());
    }
    const std::string* co = r.attribute("coalesced");
    a.coalesced_possible = co && *co == "possible";
    if (co && *co != "possible")
        r.fail("unknown coalesced marker '" + *co + "'");
    bool seen_source = false, seen_target = false;
    for (;;) {
        Ev e = r.next();
        if (e == Ev::Text)
            continue;
        if (e == Ev::End)
            break;
        const std::string tag = r.name();
        if (tag != "source" && tag != "target")
            r.fail("unexpected element <" + tag + "> in <case>");
        bool is_target = tag == "target";
        if ((is_target && seen_target) || (!is_target && seen_source))
            r.fail("repeated <" + tag + ">");
        (is_target ? seen_target : seen_source) = true;
        auto& profiles = is_target ? a.target : a.source;
        for (;;) {
            e = r.next();
            if (e == Ev::Text)
                continue;
            if (e == Ev::End)
                break;
            if (r.name() != "profile")
                r.fail("unexpected element <" + r.name() + "> in <" + tag + ">");
            r.only_attributes({"authorid"});
            std::string id = r.require("authorid");
            if (profiles.count(id))
                r.fail("profile '" + id + "' listed twice in <" + tag + ">");
            auto& ms = profiles[id];
            for (;;) {
                e = r.next();
                if (e == Ev::Text)
                    continue;
                if (e == Ev::End)
                    break;
                if (r.name() != "signature")
                    r.fail("unexpected element <" + r.name() + "> in <profile>");
                Signature s = read_signature(r, is_target);
                if (const std::string* n = r.attribute("new")) {
                    if (*n != "true")
                        r.fail("new must be \"true\" when present");
                    a.new_mentions.insert(s.key());
                }
                ms.push_back(std::move(s));
                r.skip_element();
            }
            std::sort(ms.begin(), ms.end(), key_less);
        }
    }
    if (!seen_source || !seen_target)
        r.fail("<case> needs both <source> and <target>");
    return a;
}

}  // namespace detail

/// A single <case> element with its <source> and <target> blocks.
inline std::string serialize_annotation(const EmbeddedAnnotation& a) {
    std::string out;
    detail::write_annotation(out, a, "");
    return out;
}

inline EmbeddedAnnotation parse_annotation(std::string_view bytes) {
    using Ev = xml::Reader::Event;
    xml::Reader r(std::make_unique<xml::StringSource>(bytes));
    Ev e = r.next();
    while (e == Ev::Text)
        e = r.next();
    if (e != Ev::Start || r.name() != "case")
        r.fail("expected <case> element");
    auto a = detail::read_annotation(r);
    while (r.next() != Ev::Eof) {
    }
    return a;
}

inline std::string serialize_annotations(const AnnotationFile& f) {
    std::string out(xml::declaration);
    out += "<annotations";
    xml::put_attr(out, "t1", f.t1.str());
    xml::put_attr(out, "t2", f.t2.str());
    out += ">\n";
    for (const auto& a : f.annotations)
        detail::write_annotation(out, a, "  ");
    out += "</annotations>\n";
    return out;
}

inline AnnotationFile parse_annotations(std::string_view bytes) {
    using Ev = xml::Reader::Event;
    xml::Reader r(xml::auto_decompress(std::make_unique<xml::StringSource>(bytes)));
    Ev e = r.next();
    while (e == Ev::Text)
        e = r.next();
    if (e != Ev::Start || r.name() != "annotations")
        r.fail("expected <annotations> root element");
    r.only_attributes({"t1", "t2"});
    AnnotationFile f;
    try {
        f.t1 = Date::parse(r.require("t1"));
        f.t2 = Date::parse(r.require("t2"));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& err) {
        r.fail(err.what());
    }
    for (;;) {
        e = r.next();
        if (e == Ev::Text)
            continue;
        if (e == Ev::End)
            break;
        if (r.name() != "case")
            r.fail("unexpected element <" + r.name() + "> in <annotations>");
        f.annotations.push_back(detail::read_annotation(r));
    }
    while (r.next() != Ev::Eof) {
    }
    return f;
}

/// Validation findings for one annotation: empty sides, and the degenerate
/// case where source and target are the same single profile with the same
/// mentions.
inline std::vector<std::string> annotation_issues(const EmbeddedAnnotation& a) {
    std::vector<std::string> out;
    if (a.source.empty())
        out.push_back(a.case_id + ": empty source");
    if (a.target.empty())
        out.push_back(a.case_id + ": empty target");
    if (a.source.size() == 1 && a.target.size() == 1 && a.source.begin()->first == a.target.begin()->first) {
        const auto& x = a.source.begin()->second;
        const auto& y = a.target.begin()->second;
        if (std::equal(x.begin(), x.end(), y.begin(), y.end(), same_key))
            out.push_back(a.case_id + ": degenerate (source equals target)");
    }
    return out;
}

/// Source-side references that do not resolve against the exported snapshot.
inline std::vector<std::string> dangling_references(const AnnotationFile& f, const Snapshot& exported) {
    std::vector<std::string> out;
    for (const auto& a : f.annotations)
        for (const auto& [id, ms] : a.source) {
            const Profile* p = exported.find_profile(id);
            for (const auto& m : ms) {
                const DocumentRecord* d = exported.find_document(m.document_key);
                if (!d || m.position >= d->names(m.role).size() || !p || !p->find(m.ref()))
                    out.push_back(a.case_id + ": " + id + " (" + m.document_key + ", " + std::to_string(m.position) +
                                  ")");
            }
        }
    return out;
}

struct KindCounts {
    std::size_t merge = 0;
    std::size_t split = 0;
    std::size_t distribute = 0;

    std::size_t total() const noexcept { return merge + split + distribute; }
    void add(CorrectionKind k) {
        switch (k) {
        case CorrectionKind::Merge: ++merge; break;
        case CorrectionKind::Split: ++split; break;
        case CorrectionKind::Distribute: ++distribute; break;
        }
    }
    friend bool operator==(const KindCounts&, const KindCounts&) = default;
};

inline KindCounts count_kinds(const std::vector<CorrectionCase>& cases) {
    KindCounts k;
    for (const auto& c : cases)
        k.add(c.kind);
    return k;
}

/// Cases between t1 and t2 with no intermediate observations.
inline std::vector<CorrectionCase> two_point_cases(const History& h, const Date& t1, const Date& t2) {
    if (!(t1 < t2))
        throw Error("embedded collection needs t1 < t2, got " + t1.str() + " and " + t2.str());
    History pair({h.at(t1), h.at(t2)});
    return extract_corrections(pair);
}

/// Writes snapshot-<t1>.xml, annotations.xml and manifest.tsv into `out_dir`.
inline KindCounts build_embedded_collection(const History& h, const Date& t1, const Date& t2,
                                            const std::filesystem::path& out_dir,
                                            const std::optional<std::filesystem::path>& staging = std::nullopt) {
    auto cases = two_point_cases(h, t1, t2);
    ensure_directory(out_dir);
    write_file(out_dir / snapshot_file_name(t1), write_snapshot(h.at(t1)), staging);

    AnnotationFile file{t1, t2, {}};
    auto ids = case_ids(cases);
    for (std::size_t i = 0; i < cases.size(); ++i)
        file.annotations.push_back(make_annotation(cases[i], ids[i]));
    write_file(out_dir / "annotations.xml", serialize_annotations(file), staging);

    KindCounts counts = count_kinds(cases);
    std::ostringstream m;
    m << "# annotations compare " << t1 << " with " << t2
      << " directly; corrections in between may be coalesced into one annotation\n";
    m << "kind\tcount\n";
    m << "split\t" << counts.split << "\nmerge\t" << counts.merge << "\ndistribute\t" << counts.distribute
      << "\nall\t" << counts.total() << "\n";
    write_file(out_dir / "manifest.tsv", m.str(), staging);
    return counts;
}

}  // namespace corrhist
