#pragma once

// corrhist command line. Each subcommand only wires library calls together.
// Exit status: 0 success, 1 validation or integrity failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "corrhist/blocking.hpp"
#include "corrhist/casegraph.hpp"
#include "corrhist/embedded.hpp"
#include "corrhist/extractor.hpp"
#include "corrhist/fsutil.hpp"
#include "corrhist/generator.hpp"
#include "corrhist/ingest.hpp"

namespace corrhist::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_usage = 2;

namespace detail {

struct Options {
    std::string snapshots;
    std::string out;
    unsigned parallel = 1;
    bool quiet = false;

    // generate
    std::uint64_t seed = 1;
    std::string preset = "desk";
    std::optional<std::size_t> persons, documents, intervals;
    std::optional<std::size_t> merges, splits, distributes, renames, new_publications;
    std::string isolation = "adjacent";
    std::string start_date = "2017-01-01";
    bool dense = false;
    bool gzip = false;

    // embedded
    std::string t1, t2;

    // blocking
    bool no_strip_suffix = false;
};

inline std::optional<std::filesystem::path> staging_dir() {
    if (const char* t = std::getenv("CORRHIST_TMPDIR"); t && *t)
        return std::filesystem::path(t);
    return std::nullopt;
}

class Progress {
public:
    Progress(std::ostream& err, bool quiet) : err_(err), quiet_(quiet) {}
    void operator()(const std::string& msg) const {
        if (!quiet_)
            err_ << "corrhist: " << msg << '\n';
    }

private:
    std::ostream& err_;
    bool quiet_;
};

inline History load(const Options& o, const Progress& progress) {
    auto files = list_snapshot_files(o.snapshots);
    if (files.empty())
        throw Error("no snapshot files in '" + o.snapshots + "'");
    progress("loading " + std::to_string(files.size()) + " snapshots from " + o.snapshots);
    return load_history(files, o.parallel);
}

inline std::string counts_line(const KindCounts& k) {
    std::ostringstream s;
    s << "cases: " << k.total() << " (split " << k.split << ", merge " << k.merge << ", distribute "
      << k.distribute << ")";
    return s.str();
}

inline Isolation parse_isolation(const std::string& s) {
    if (s == "none")
        return Isolation::None;
    if (s == "adjacent")
        return Isolation::Adjacent;
    if (s == "global")
        return Isolation::Global;
    throw Error("unknown isolation '" + s + "'");
}

inline GeneratorConfig generator_config(const Options& o) {
    GeneratorConfig c = o.preset == "stress" ? GeneratorConfig::stress(o.seed) : GeneratorConfig::desk(o.seed);
    if (o.persons)
        c.persons = *o.persons;
    if (o.documents)
        c.documents = *o.documents;
    IntervalPlan per = c.plan.empty() ? IntervalPlan{} : c.plan.front();
    if (o.merges)
        per.merges = *o.merges;
    if (o.splits)
        per.splits = *o.splits;
    if (o.distributes)
        per.distributes = *o.distributes;
    if (o.renames)
        per.renames = *o.renames;
    if (o.new_publications)
        per.new_publications = *o.new_publications;
    std::size_t intervals = o.intervals.value_or(c.plan.size());
    Date start = Date::parse(o.start_date);
    if (o.dense) {
        IntervalPlan totals{per.merges * intervals, per.splits * intervals, per.distributes * intervals,
                            per.renames * intervals, per.new_publications * intervals};
        c.plan = dense_plan(totals, o.seed);
    } else {
        c.plan.assign(intervals, per);
    }
    c.dates = daily_dates(start, c.plan.size() + 1);
    c.isolation = parse_isolation(o.isolation);
    return c;
}

inline int cmd_generate(const Options& o, std::ostream& out, const Progress& progress) {
    auto config = generator_config(o);
    progress("generating " + std::to_string(config.dates.size()) + " snapshots (seed " + std::to_string(o.seed) +
             ")");
    auto g = generate(config);
    std::filesystem::path dir(o.out);
    ensure_directory(dir);
    auto staging = staging_dir();
    for (const auto& s : g.history.snapshots()) {
        xml::StringSink sink;
        if (o.gzip) {
            xml::GzipSink gz(sink);
            write_snapshot(s, gz);
        } else {
            write_snapshot(s, sink);
        }
        write_file(dir / snapshot_file_name(s.date(), o.gzip), sink.data(), staging);
    }
    write_file(dir / "ground-truth.tsv", ground_truth_tsv(g.log), staging);
    KindCounts k;
    std::size_t other = 0;
    for (const auto& e : g.log) {
        if (e.kind == EditKind::Merge)
            ++k.merge;
        else if (e.kind == EditKind::Split)
            ++k.split;
        else if (e.kind == EditKind::Distribute)
            ++k.distribute;
        else
            ++other;
    }
    out << "snapshots: " << g.history.size() << "; injected corrections: " << k.total() << " (split " << k.split
        << ", merge " << k.merge << ", distribute " << k.distribute << "); other edits: " << other << '\n';
    return exit_ok;
}

inline int cmd_extract(const Options& o, std::ostream& out, const Progress& progress) {
    History h = load(o, progress);
    progress("extracting corrections over " + std::to_string(h.size() - 1) + " intervals");
    auto cases = extract_corrections(h, o.parallel);
    write_file(o.out, case_summary_tsv(cases), staging_dir());
    out << counts_line(count_kinds(cases)) << '\n';
    return exit_ok;
}

inline int cmd_case_collection(const Options& o, std::ostream& out, const Progress& progress) {
    History h = load(o, progress);
    progress("extracting corrections over " + std::to_string(h.size() - 1) + " intervals");
    auto cases = extract_corrections(h, o.parallel);
    progress("writing " + std::to_string(cases.size() * 2) + " case graphs to " + o.out);
    build_case_collection(cases, h, o.out, o.parallel, staging_dir());
    out << counts_line(count_kinds(cases)) << '\n';
    return exit_ok;
}

inline int cmd_embedded(const Options& o, std::ostream& out, const Progress& progress) {
    Date t1 = Date::parse(o.t1);
    Date t2 = Date::parse(o.t2);
    History h = load(o, progress);
    progress("annotating " + t1.str() + " against " + t2.str());
    auto k = build_embedded_collection(h, t1, t2, o.out, staging_dir());
    out << t1 << '\t' << t2 << "\tsplit " << k.split << "\tmerge " << k.merge << "\tdistribute " << k.distribute
        << "\tall " << k.total() << '\n';
    return exit_ok;
}

inline int cmd_blocking(const Options& o, std::ostream& out, const Progress& progress) {
    History h = load(o, progress);
    auto cases = extract_corrections(h, o.parallel);
    std::string report = blocking_report_tsv(blocking_report(cases, !o.no_strip_suffix));
    if (o.out.empty())
        out << report;
    else
        write_file(o.out, report, staging_dir());
    return exit_ok;
}

inline int cmd_stats(const Options& o, std::ostream& out, const Progress& progress) {
    History h = load(o, progress);
    out << "date\tprofiles\tdocuments\tmentions\tvenues\n";
    for (const auto& s : h.snapshots())
        out << s.date() << '\t' << s.profiles().size() << '\t' << s.documents().size() << '\t' << s.mention_count()
            << '\t' << s.venues().size() << '\n';
    return exit_ok;
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    using namespace detail;
    Options o;
    CLI::App app{"Correction histories of author profiles: extraction, case graphs, embedded annotations, "
                 "blocking analysis and synthetic histories",
                 "corrhist"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Print help for every subcommand");

    auto add_common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--snapshots", o.snapshots, "Directory of snapshot-YYYY-MM-DD.xml[.gz] files")->required();
        auto* opt = sub->add_option("--out", o.out, "Output path");
        if (needs_out)
            opt->required();
        sub->add_option("--parallel", o.parallel, "Worker threads (1 is the determinism reference)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", o.quiet, "Suppress progress messages");
    };

    auto* gen = app.add_subcommand("generate", "Write a synthetic history and its ground-truth log");
    gen->add_option("--out", o.out, "Output directory")->required();
    gen->add_option("--seed", o.seed, "Random seed");
    gen->add_option("--preset", o.preset, "Base configuration")->check(CLI::IsMember({"desk", "stress"}));
    gen->add_option("--persons", o.persons, "Number of persons");
    gen->add_option("--documents", o.documents, "Number of documents");
    gen->add_option("--intervals", o.intervals, "Number of intervals (snapshots minus one)");
    gen->add_option("--merges", o.merges, "Merges per interval");
    gen->add_option("--splits", o.splits, "Splits per interval");
    gen->add_option("--distributes", o.distributes, "Distributes per interval");
    gen->add_option("--renames", o.renames, "Renames per interval");
    gen->add_option("--new-publications", o.new_publications, "New publications per interval");
    gen->add_option("--isolation", o.isolation, "Edit isolation")->check(CLI::IsMember({"none", "adjacent", "global"}));
    gen->add_option("--start-date", o.start_date, "First observation date");
    gen->add_flag("--dense", o.dense, "Spread the edits one per interval");
    gen->add_flag("--gzip", o.gzip, "Write gzip-compressed snapshots");
    gen->add_flag("--quiet", o.quiet, "Suppress progress messages");

    auto* ext = app.add_subcommand("extract", "Extract correction cases into a TSV summary");
    add_common(ext, true);

    auto* col = app.add_subcommand("case-collection", "Build before/after case graphs for every correction");
    add_common(col, true);

    auto* emb = app.add_subcommand("embedded", "Export the collection at t1 annotated with corrections up to t2");
    add_common(emb, true);
    emb->add_option("--t1", o.t1, "Earlier observation date")->required();
    emb->add_option("--t2", o.t2, "Later observation date")->required();

    auto* blk = app.add_subcommand("blocking", "Name-blocking hit rates over merge and distribute cases");
    add_common(blk, false);
    blk->add_flag("--no-strip-suffix", o.no_strip_suffix, "Keep four-digit homonym suffixes in keys");

    auto* sts = app.add_subcommand("stats", "Per-snapshot counts");
    add_common(sts, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help(app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name());
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "corrhist: " << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    Progress progress(err, o.quiet);
    try {
        if (gen->parsed())
            return cmd_generate(o, out, progress);
        if (ext->parsed())
            return cmd_extract(o, out, progress);
        if (col->parsed())
            return cmd_case_collection(o, out, progress);
        if (emb->parsed())
            return cmd_embedded(o, out, progress);
        if (blk->parsed())
            return cmd_blocking(o, out, progress);
        if (sts->parsed())
            return cmd_stats(o, out, progress);
    } catch (const Error& e) {
        err << "corrhist: error: " << e.what() << '\n';
        return exit_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "corrhist: error: " << e.what() << '\n';
        return exit_failure;
    } catch (const std::exception& e) {
        err << "corrhist: error: " << e.what() << '\n';
        return exit_failure;
    }
    err << app.help();
    return exit_usage;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
    return run(args, out, err);
}

}  // namespace corrhist::cli
