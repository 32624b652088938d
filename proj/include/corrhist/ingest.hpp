#pragma once

// Canonical snapshot files: reading (streaming, gzip auto-detected), writing
// (deterministic), and assembly of a History from an ordered file list.
//
//   <snapshot date="2017-01-01" version="1">
//     <venue key="v7" name="Unreferenced venue"/>
//     <document pkey="doc1" year="1999">
//       <title>The Ultrasonic Navigating.</title>
//       <venue key="v1">Journal of Robotics</venue>
//       <link>https://doi.org/...</link>
//       <author>B. Doe</author>
//       <editor>...</editor>
//     </document>
//     <profile authorid="p1">
//       <signature pkey="doc1" pos="1" surface="B. Doe"/>
//       <signature pkey="proc2" pos="0" surface="B. Doe" role="editor"/>
//     </profile>
//   </snapshot>
//
// Author and editor positions are indexed independently.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "corrhist/model.hpp"
#include "corrhist/parallel.hpp"
#include "corrhist/xml.hpp"

namespace corrhist {

inline constexpr int snapshot_format_version = 1;

/// Callbacks receiving snapshot records as they are parsed.
struct SnapshotHandlers {
    std::function<void(const Date&)> header;
    std::function<void(std::string key, std::string name)> venue;
    std::function<void(DocumentRecord)> document;
    std::function<void(Profile)> profile;
};

namespace detail {

inline Role parse_role(const xml::Reader& r) {
    const std::string* role = r.attribute("role");
    if (!role || *role == "author")
        return Role::Author;
    if (*role == "editor")
        return Role::Editor;
    r.fail("unknown role '" + *role + "'");
}

inline Signature read_signature(xml::Reader& r, bool allow_new_flag = false) {
    if (allow_new_flag)
        r.only_attributes({"pkey", "pos", "surface", "role", "new"});
    else
        r.only_attributes({"pkey", "pos", "surface", "role"});
    Signature s;
    s.document_key = r.require("pkey");
    s.position = r.parse_int<std::uint32_t>(r.require("pos"), "position");
    s.surface = r.require("surface");
    s.role = parse_role(r);
    return s;
}

inline void write_signature(std::string& out, const Signature& s, std::string_view indent, bool is_new = false) {
    out += indent;
    out += "<signature";
    xml::put_attr(out, "pkey", s.document_key);
    out += " pos=\"";
    out += std::to_string(s.position);
    out += '"';
    xml::put_attr(out, "surface", s.surface);
    if (s.role == Role::Editor)
        out += " role=\"editor\"";
    if (is_new)
        out += " new=\"true\"";
    out += "/>\n";
}

}  // namespace detail

/// Streams the records of a canonical snapshot to `on`. Memory held by the
/// reader itself is bounded by its chunk size plus the largest token.
inline void stream_snapshot(xml::Reader& r, const SnapshotHandlers& on) {
    using Ev = xml::Reader::Event;
    Ev e = r.next();
    while (e == Ev::Text)
        e = r.next();
    if (e != Ev::Start || r.name() != "snapshot")
        r.fail("expected <snapshot> root element");
    r.only_attributes({"date", "version"});
    if (const std::string* v = r.attribute("version")) {
        if (r.parse_int<int>(*v, "format version") != snapshot_format_version)
            r.fail("unsupported snapshot format version " + *v);
    }
    Date date;
    try {
        date = Date::parse(r.require("date"));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& err) {
        r.fail(err.what());
    }
    if (on.header)
        on.header(date);

    std::map<std::string, std::string, std::less<>> venue_names;
    auto note_venue = [&](const std::string& key, const std::string& name) {
        auto [it, inserted] = venue_names.emplace(key, name);
        if (!inserted && it->second != name)
            throw IntegrityError("venue '" + key + "' has conflicting names '" + it->second + "' and '" + name + "'");
        if (inserted && on.venue)
            on.venue(key, name);
    };

    for (;;) {
        e = r.next();
        if (e == Ev::Text)
            continue;
        if (e == Ev::End)
            break;
        if (r.name() == "venue") {
            r.only_attributes({"key", "name"});
            std::string key = r.require("key");
            std::string name = r.require("name");
            r.skip_element();
            note_venue(key, name);
        } else if (r.name() == "document") {
            r.only_attributes({"pkey", "year"});
            DocumentRecord doc;
            doc.key = r.require("pkey");
            doc.year = r.parse_int<int>(r.require("year"), "year");
            for (;;) {
                e = r.next();
                if (e == Ev::Text)
                    continue;
                if (e == Ev::End)
                    break;
                const std::string child = r.name();
                if (child == "title") {
                    doc.title = r.read_text_content();
                } else if (child == "venue") {
                    r.only_attributes({"key"});
                    std::string key = r.require("key");
                    std::string name = r.read_text_content();
                    note_venue(key, name);
                    doc.venue_key = std::move(key);
                } else if (child == "link") {
                    doc.link = r.read_text_content();
                } else if (child == "author") {
                    doc.authors.push_back(r.read_text_content());
                } else if (child == "editor") {
                    doc.editors.push_back(r.read_text_content());
                } else {
                    r.fail("unexpected element <" + child + "> in <document>");
                }
            }
            if (on.document)
                on.document(std::move(doc));
        } else if (r.name() == "profile") {
            r.only_attributes({"authorid"});
            std::string id = r.require("authorid");
            std::vector<Signature> mentions;
            for (;;) {
                e = r.next();
                if (e == Ev::Text)
                    continue;
                if (e == Ev::End)
                    break;
                if (r.name() != "signature")
                    r.fail("unexpected element <" + r.name() + "> in <profile>");
                mentions.push_back(detail::read_signature(r));
                r.skip_element();
            }
            if (on.profile)
                on.profile(Profile(std::move(id), std::move(mentions)));
        } else {
            r.fail("unexpected element <" + r.name() + "> in <snapshot>");
        }
    }
    while ((e = r.next()) != Ev::Eof) {
    }
}

inline Snapshot parse_snapshot(std::unique_ptr<xml::ByteSource> src) {
    xml::Reader r(xml::auto_decompress(std::move(src)));
    Date date;
    std::map<std::string, std::string> venues;
    std::vector<DocumentPtr> documents;
    std::vector<ProfilePtr> profiles;
    SnapshotHandlers on;
    on.header = [&](const Date& d) { date = d; };
    on.venue = [&](std::string k, std::string n) { venues.emplace(std::move(k), std::move(n)); };
    on.document = [&](DocumentRecord d) { documents.push_back(std::make_shared<const DocumentRecord>(std::move(d))); };
    on.profile = [&](Profile p) { profiles.push_back(std::make_shared<const Profile>(std::move(p))); };
    stream_snapshot(r, on);
    return Snapshot(std::move(date), std::move(profiles), std::move(documents), std::move(venues));
}

/// Parses a canonical snapshot held in memory (plain or gzip).
inline Snapshot parse_snapshot(std::string_view bytes) {
    return parse_snapshot(std::make_unique<xml::StringSource>(bytes));
}

inline Snapshot read_snapshot_file(const std::filesystem::path& path) {
    return parse_snapshot(std::make_unique<xml::FileSource>(path.string()));
}

/// Writes `s` in canonical form: profiles by id, signatures by (pkey, pos),
/// documents by key. Output depends only on the snapshot value.
inline void write_snapshot(const Snapshot& s, xml::ByteSink& sink) {
    std::string out;
    auto spill = [&] {
        if (out.size() >= (1u << 20)) {
            sink.write(out);
            out.clear();
        }
    };
    out += xml::declaration;
    out += "<snapshot";
    xml::put_attr(out, "date", s.date().str());
    out += " version=\"" + std::to_string(snapshot_format_version) + "\"";
    if (s.profiles().empty() && s.documents().empty() && s.venues().empty()) {
        out += "/>\n";
        sink.write(out);
        sink.flush();
        return;
    }
    out += ">\n";

    std::map<std::string_view, bool> referenced;
    for (const auto& d : s.documents())
        if (d->venue_key)
            referenced[*d->venue_key] = true;
    for (const auto& [key, name] : s.venues()) {
        if (referenced.count(key))
            continue;
        out += "  <venue";
        xml::put_attr(out, "key", key);
        xml::put_attr(out, "name", name);
        out += "/>\n";
    }
    for (const auto& dp : s.documents()) {
        const DocumentRecord& d = *dp;
        out += "  <document";
        xml::put_attr(out, "pkey", d.key);
        out += " year=\"" + std::to_string(d.year) + "\">\n";
        out += "    <title>";
        xml::escape_into(out, d.title);
        out += "</title>\n";
        if (d.venue_key) {
            out += "    <venue";
            xml::put_attr(out, "key", *d.venue_key);
            out += '>';
            xml::escape_into(out, s.venues().at(*d.venue_key));
            out += "</venue>\n";
        }
        if (d.link) {
            out += "    <link>";
            xml::escape_into(out, *d.link);
            out += "</link>\n";
        }
        for (const auto& a : d.authors) {
            out += "    <author>";
            xml::escape_into(out, a);
            out += "</author>\n";
        }
        for (const auto& a : d.editors) {
            out += "    <editor>";
            xml::escape_into(out, a);
            out += "</editor>\n";
        }
        out += "  </document>\n";
        spill();
    }
    for (const auto& pp : s.profiles()) {
        out += "  <profile";
        xml::put_attr(out, "authorid", pp->id());
        if (pp->empty()) {
            out += "/>\n";
            continue;
        }
        out += ">\n";
        for (const auto& m : pp->mentions())
            detail::write_signature(out, m, "    ");
        out += "  </profile>\n";
        spill();
    }
    out += "</snapshot>\n";
    sink.write(out);
    sink.flush();
}

inline std::string write_snapshot(const Snapshot& s) {
    xml::StringSink sink;
    write_snapshot(s, sink);
    return std::move(sink.data());
}

inline void write_snapshot_file(const Snapshot& s, const std::filesystem::path& path, bool gzip = false) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw Error("cannot write '" + path.string() + "'");
    xml::StreamSink file_sink(f);
    if (gzip) {
        xml::GzipSink gz(file_sink);
        write_snapshot(s, gz);
    } else {
        write_snapshot(s, file_sink);
    }
}

inline std::string snapshot_file_name(const Date& d, bool gzip = false) {
    return "snapshot-" + d.str() + (gzip ? ".xml.gz" : ".xml");
}

/// A snapshot file and, optionally, the date it is expected to declare.
struct SnapshotFile {
    std::filesystem::path path;
    std::optional<Date> declared_date;
};

/// Snapshot files (*.xml, *.xml.gz) in `dir`, sorted by file name. Names of
/// the form snapshot-YYYY-MM-DD.* carry a declared date.
inline std::vector<SnapshotFile> list_snapshot_files(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir))
        throw Error("not a directory: '" + dir.string() + "'");
    static const std::regex dated(R"(snapshot-(\d{4}-\d{2}-\d{2})\.xml(\.gz)?)");
    std::vector<SnapshotFile> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file())
            continue;
        std::string name = entry.path().filename().string();
        auto ends_with = [&](std::string_view suf) {
            return name.size() >= suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0;
        };
        if (!ends_with(".xml") && !ends_with(".xml.gz"))
            continue;
        SnapshotFile f{entry.path(), std::nullopt};
        std::smatch m;
        if (std::regex_match(name, m, dated))
            f.declared_date = Date::parse(m[1].str());
        files.push_back(std::move(f));
    }
    std::sort(files.begin(), files.end(),
              [](const SnapshotFile& a, const SnapshotFile& b) { return a.path.filename() < b.path.filename(); });
    return files;
}

namespace detail {

inline Snapshot load_one(const SnapshotFile& f) {
    const std::string name = f.path.string();
    Snapshot s;
    try {
        s = read_snapshot_file(f.path);
    } catch (const ParseError& e) {
        throw ParseError(name + ": " + e.message(), e.offset());
    } catch (const IntegrityError& e) {
        throw IntegrityError(name + ": " + e.what());
    } catch (const Error& e) {
        throw Error(name + ": " + e.what());
    }
    if (f.declared_date && *f.declared_date != s.date())
        throw IntegrityError(name + ": header date " + s.date().str() + " does not match declared date " +
                             f.declared_date->str());
    return s;
}

}  // namespace detail

/// Reads the files (up to `parallel` at a time) into a History. Records equal
/// to those of the preceding snapshot are shared rather than duplicated.
inline History load_history(const std::vector<SnapshotFile>& files, unsigned parallel = 1) {
    if (files.empty())
        throw Error("no snapshot files given");
    parallel = std::max(1u, parallel);
    std::vector<Snapshot> snapshots;
    snapshots.reserve(files.size());
    for (std::size_t begin = 0; begin < files.size(); begin += parallel) {
        std::size_t n = std::min<std::size_t>(parallel, files.size() - begin);
        std::vector<Snapshot> batch(n);
        parallel_for(n, parallel, [&](std::size_t i) { batch[i] = detail::load_one(files[begin + i]); });
        for (std::size_t i = 0; i < n; ++i) {
            Snapshot s = std::move(batch[i]);
            if (!snapshots.empty()) {
                const Snapshot& prev = snapshots.back();
                if (!(prev.date() < s.date()))
                    throw OrderError("snapshot dates not strictly increasing: '" +
                                     files[begin + i - 1].path.string() + "' (" + prev.date().str() + ") precedes '" +
                                     files[begin + i].path.string() + "' (" + s.date().str() + ")");
                s = s.share_with(prev);
            }
            snapshots.push_back(std::move(s));
        }
    }
    return History(std::move(snapshots));
}

/// Writes every snapshot of `h` into `dir` using snapshot_file_name().
inline std::vector<std::filesystem::path> write_history(const History& h, const std::filesystem::path& dir,
                                                         bool gzip = false) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& s : h.snapshots()) {
        auto p = dir / snapshot_file_name(s.date(), gzip);
        write_snapshot_file(s, p, gzip);
        paths.push_back(p);
    }
    return paths;
}

}  // namespace corrhist
