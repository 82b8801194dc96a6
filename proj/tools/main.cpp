#include <chrono>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbslab/errors.hpp"
#include "session.hpp"

using namespace gibbslab;
using gibbslab::cli::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 2;
constexpr int kExitResource = 3;
constexpr int kExitTolerance = 4;

struct Override {
    std::string key, value;
};

// Pulls "--a.b value" and "--a.b=value" out of argv; CLI11 sees the rest.
std::vector<std::string> extract_overrides(int argc, char** argv, std::vector<Override>& out) {
    std::vector<std::string> rest{argv[0]};
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a.rfind("--", 0) == 0 && a.find('.') != std::string::npos && a.find('.') < a.find('=')) {
            const auto eq = a.find('=');
            if (eq != std::string::npos) {
                out.push_back({a.substr(2, eq - 2), a.substr(eq + 1)});
            } else {
                if (i + 1 >= argc) throw DomainError("missing value for " + a);
                out.push_back({a.substr(2), argv[++i]});
            }
            continue;
        }
        rest.push_back(a);
    }
    return rest;
}

json load_config(const std::string& path, const std::vector<Override>& overrides) {
    json cfg = io::default_config();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw DomainError("cannot read config " + path);
        json user;
        try {
            user = json::parse(in);
        } catch (const json::parse_error& e) {
            throw DomainError("config " + path + ": " + e.what());
        }
        cfg = io::merge_config(cfg, user);
    }
    for (const auto& o : overrides) io::apply_override(cfg, o.key, o.value);
    io::validate_config(cfg);
    return cfg;
}

// Runs the named stages; returns the failed quantities.
std::vector<std::string> run(const std::string& sub, const std::vector<const cli::Stage*>& todo, const json& cfg,
                             const std::string& out_dir, bool keep_going) {
    cli::Session session(cfg);
    io::Artifacts art(out_dir, io::config_hash(cfg));
    std::vector<std::string> failures;
    json summaries = json::object();
    for (const cli::Stage* st : todo) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            cli::StageResult r = st->run(session, art);
            summaries[st->name] = r.summary;
            failures.insert(failures.end(), r.failures.begin(), r.failures.end());
        } catch (const DomainError&) {
            throw;
        } catch (const ResourceError&) {
            throw;
        } catch (const std::runtime_error& e) {
            if (!keep_going) throw;
            // Tolerance, diagnostic and numeric errors end the stage, not the run.
            failures.push_back(std::string(st->name) + ".error");
            summaries[st->name] = {{"error", e.what()}};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        art.record_stage(st->name, secs);
        std::cerr << st->name << ": " << (secs < 10 ? std::to_string(secs).substr(0, 4) : std::to_string(int(secs)))
                  << " s\n";
    }
    art.write_manifest(sub, {{"failures", failures}, {"summaries", summaries}, {"config", cfg}});
    return failures;
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<Override> overrides;
    std::vector<std::string> args;
    try {
        args = extract_overrides(argc, argv, overrides);
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDomain;
    }

    CLI::App app{"Gibbs measures, F-harmonic functions and suspensions on hyperbolic surfaces"};
    app.footer("Any config key can be overridden as --section.key value, e.g. --ball.radius 7.");
    std::string config_path, out_dir = "";
    app.add_option("--config", config_path, "JSON config merged over the defaults");
    app.add_option("--out", out_dir, "output directory (default: config 'output')");
    app.require_subcommand(1);
    app.fallthrough();

    std::vector<std::pair<CLI::App*, std::string>> subs;
    for (const auto& st : cli::stages()) subs.emplace_back(app.add_subcommand(st.name, std::string("run ") + st.name), st.name);
    CLI::App* all = app.add_subcommand("all", "run every stage and write one manifest");
    app.add_subcommand("config", "print the effective config");

    std::vector<char*> cargv;
    for (auto& a : args) cargv.push_back(a.data());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kExitDomain;
    }

    const std::string sub = app.get_subcommands().front()->get_name();
    try {
        const json cfg = load_config(config_path, overrides);
        if (sub == "config") {
            std::cout << cfg.dump(2) << '\n';
            return kExitOk;
        }
        const std::string dir = out_dir.empty() ? cfg.at("output").get<std::string>() : out_dir;
        std::vector<const cli::Stage*> todo;
        for (const auto& st : cli::stages())
            if (all->parsed() || sub == st.name) todo.push_back(&st);
        const auto failures = run(sub, todo, cfg, dir, all->parsed());
        if (!failures.empty()) {
            for (const auto& f : failures) std::cerr << "tolerance failed: " << f << '\n';
            return kExitTolerance;
        }
        std::cout << "ok: " << dir << '\n';
        return kExitOk;
    } catch (const DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return kExitResource;
    } catch (const ToleranceError& e) {
        std::cerr << "tolerance failed: " << e.what() << '\n';
        return kExitTolerance;
    } catch (const DiagnosticError& e) {
        std::cerr << "diagnostic failed: " << e.what() << '\n';
        return kExitTolerance;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return kExitTolerance;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
