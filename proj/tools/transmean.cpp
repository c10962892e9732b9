// transmean: test, screen, simulate, discover, convert.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "transmean/commands.hpp"
#include "transmean/sim_config.hpp"

using namespace transmean;

namespace {

Orientation parse_orientation(const std::string& s) {
    return s == "rows" ? Orientation::rows : Orientation::columns;
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    CLI::App app{"Nonparametric test for the mean matrix of transposable data"};
    app.require_subcommand(1);
    std::string orientation = "columns";
    const auto orientations = CLI::IsMember({"columns", "rows"});

    TestOptions test;
    auto* t = app.add_subcommand("test", "test a hypothesis about the mean matrix");
    t->add_option("data", test.data, "stack or long-format data file")->required();
    t->add_option("--partition", test.partition, "sizes=c1,c2,... or groups=label:gid,...");
    t->add_option("--m0", test.m0, "known mean matrix file (r lines of c values)");
    t->add_option("--diff-cols", test.diff_cols, "A,B: test mean(A) - mean(B) = mu0");
    t->add_option("--mu0", test.mu0, "difference vector file for --diff-cols");
    t->add_option("--alpha", test.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    t->add_option("--orientation", orientation, "group columns or rows")->check(orientations);
    t->add_option("--csv", test.csv, "also write a one-line CSV");

    ScreenOptions screen;
    std::string correction = "fdr";
    auto* s = app.add_subcommand("screen", "test each row set and correct for multiplicity");
    s->add_option("data", screen.data, "stack or long-format data file")->required();
    s->add_option("--sets", screen.sets, "row-set file")->required();
    s->add_option("--partition", screen.partition, "column partition spec")->required();
    s->add_option("--alpha", screen.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    s->add_option("--correction", correction, "fdr or bonferroni")->check(CLI::IsMember({"fdr", "bh", "bonferroni", "bon"}));
    s->add_option("--min-size", screen.min_size, "skip sets with fewer rows");
    s->add_option("--csv", screen.csv, "per-set CSV output");

    SimulateOptions sim;
    auto* m = app.add_subcommand("simulate", "Monte Carlo size and power");
    m->add_option("--preset", sim.preset, "table1, table2, table3, table4, table5 or webtable2");
    m->add_option("--config", sim.config, "key=value config file");
    m->add_option("--cell", sim.cell, "preset cell filter, e.g. r=100,N=50");
    m->add_option("--reps", sim.replicates, "replicates per cell")->check(CLI::PositiveNumber);
    m->add_option("--seed", sim.seed, "base seed");
    m->add_option("--threads", sim.threads, "worker threads (0: TRANSMEAN_THREADS or all cores)");
    m->add_option("-o,--output", sim.output, "CSV output path")->required();
    m->add_flag("--quiet", sim.quiet, "no progress on stderr");

    DiscoverOptions discover;
    auto* d = app.add_subcommand("discover", "search for a column grouping of the mean");
    d->add_option("data", discover.data, "stack or long-format data file")->required();
    d->add_option("--alpha", discover.alpha, "significance level")->check(CLI::Range(0.0, 1.0));
    d->add_option("--orientation", orientation, "group columns or rows")->check(orientations);

    ConvertOptions convert;
    auto* c = app.add_subcommand("convert", "rewrite data in stack or long format");
    c->add_option("data", convert.data, "input data file")->required();
    c->add_option("--to", convert.to, "stack or long")->check(CLI::IsMember({"stack", "long"}));
    c->add_option("-o,--output", convert.output, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        CommandOutput out;
        if (*t) {
            test.orientation = parse_orientation(orientation);
            out = cmd_test(test, args);
        } else if (*s) {
            screen.correction = parse_adjustment(correction);
            out = cmd_screen(screen, args);
        } else if (*m) {
            out = cmd_simulate(sim, args);
        } else if (*d) {
            discover.orientation = parse_orientation(orientation);
            out = cmd_discover(discover, args);
        } else {
            out = cmd_convert(convert, args);
        }
        std::cout << out.report.dump(2) << '\n';
        return out.exit_code;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
}
