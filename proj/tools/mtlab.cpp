// mtlab: command-line front end for the coupling / mass-transport laboratory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtlab/commands.hpp"

namespace {

using namespace mtlab::cli;

int finish(const CommandOutput& out, const CommonOptions& common)
{
    std::cout << out.text;
    std::cerr << out.diagnostics;
    if (!common.out.empty() && out.exit_code != kExitUsage) {
        std::error_code ec;
        std::filesystem::create_directories(common.out, ec);
        if (ec) {
            std::cerr << "cannot create output directory " << common.out << ": " << ec.message() << "\n";
            return kExitFailed;
        }
        for (const auto& [name, content] : out.files) {
            std::ofstream f(std::filesystem::path(common.out) / name, std::ios::binary);
            f << content;
        }
    }
    return out.exit_code;
}

void add_run_options(CLI::App* cmd, RunOptions& o, bool with_replicates)
{
    cmd->add_option("--kind", o.kind, "EndBits, PeresBits, EndSets, LiftedBits or IndependentSets")->required();
    cmd->add_option("--n", o.n, "label count |S| = cycle length")->capture_default_str();
    cmd->add_option("--radius", o.radius, "tree ball radius")->capture_default_str();
    cmd->add_option("--end", o.end, "end direction letter (a, b or c)")->capture_default_str();
    if (with_replicates) {
        cmd->add_option("--replicates", o.replicates, "Monte Carlo replicates")->capture_default_str();
        cmd->add_option("--alpha", o.alpha, "test level")->capture_default_str();
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monotone coupling and mass-transport laboratory on T3 and T3 x C_n"};
    app.require_subcommand(1);

    CommonOptions common;
    app.add_option("--seed", common.seed, "64-bit seed governing every random stream")->capture_default_str();
    app.add_option("--workers", common.workers, "worker threads (0 = all cores)")->capture_default_str();
    app.add_option("--out", common.out, "directory for CSV/JSON/SVG outputs");

    ThresholdOptions threshold;
    auto* th = app.add_subcommand("threshold", "exact certificate for the 5/6 birthday condition");
    th->add_option("--max-n", threshold.max_n, "largest n to scan")->capture_default_str();

    RunOptions verify;
    auto* ve = app.add_subcommand("verify", "monotonicity, marginal and invariance checks");
    add_run_options(ve, verify, true);
    ve->add_flag("--expect-nonmonotone", verify.expect_nonmonotone,
                 "treat a failing monotonicity check as the expected outcome");

    RunOptions audit;
    auto* au = app.add_subcommand("mtp-audit", "mass sent vs received at the origin");
    add_run_options(au, audit, true);

    RunOptions dump;
    auto* du = app.add_subcommand("dump", "text dump of one replicate");
    add_run_options(du, dump, false);
    du->add_option("--replicate", dump.replicate, "replicate index")->capture_default_str();

    // Global flags are accepted after the subcommand as well.
    for (auto* sub : {th, ve, au, du}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (*th) {
        return finish(cmd_threshold(common, threshold), common);
    }
    if (*ve) {
        return finish(cmd_verify(common, verify), common);
    }
    if (*au) {
        return finish(cmd_mtp_audit(common, audit), common);
    }
    return finish(cmd_dump(common, dump), common);
}
