// agentnet: mobile-agent middleware over per-firm platforms, with a
// deterministic multi-node simulator, traceability and criteria search
// queries, and an agent-vs-baseline traffic benchmark.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "agentnet/generator.hpp"
#include "agentnet/metrics.hpp"
#include "agentnet/socket_host.hpp"

using namespace agentnet;

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case Errc::ScenarioInvalid:
        return 4;
    case Errc::Undeliverable:
    case Errc::Unreachable:
        return 3;
    default:
        return 2;
    }
}

Doc load_doc_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::BadRequest, "cannot open " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    auto doc = parse_doc(buf.str());
    if (!doc) {
        raise(Errc::BadRequest, path + " is not a well-formed document");
    }
    return *doc;
}

volatile std::sig_atomic_t g_interrupted = 0;

void on_sigint(int) {
    g_interrupted = 1;
}

struct QueryCli {
    std::string scenario_path;
    std::uint64_t seed = 1;
    std::string home;
    std::int64_t ttl = 16;
    bool partial = false;
    std::string format = "text";
};

int finish_query(SimRuntime& runtime, const QueryTicket& ticket, const QueryCli& opts) {
    if (opts.partial) {
        runtime.set_progress_hook([&](const Report& interim) {
            std::cout << "--- interim ---\n" << render_text(interim);
        });
    }
    runtime.run();
    const Report& report = runtime.report(ticket.ticket_id);
    if (opts.format == "structured") {
        std::cout << render_structured(report) << "\n";
    } else {
        std::cout << render_text(report);
    }
    if (runtime.ticket(ticket.ticket_id).status != TicketStatus::Completed) {
        std::cerr << "query failed: " << runtime.ticket(ticket.ticket_id).failure_reason << "\n";
        return 3;
    }
    return 0;
}

void print_registry(const std::vector<RegistryEntry>& entries) {
    std::cout << "agent_id                          origin  behavior    state             admitted_at\n";
    for (const auto& e : entries) {
        std::cout << e.agent_id_hex << "  " << e.origin << "  " << e.behavior << "  "
                  << registry_state_name(e.state) << "  " << e.admitted_at << "\n";
    }
    if (entries.empty()) {
        std::cout << "(no agents)\n";
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mobile-agent middleware and multi-node simulator for federated B2B retrieval"};
    app.require_subcommand(1);

    // net up
    auto* net = app.add_subcommand("net", "network lifecycle");
    auto* net_up = net->add_subcommand("up", "load a scenario and bring the platforms up");
    std::string net_scenario;
    std::uint64_t net_seed = 1;
    bool real_sockets = false;
    std::int64_t serve_ms = 0;
    net_up->add_option("--scenario", net_scenario, "scenario file")->required();
    net_up->add_option("--seed", net_seed, "run seed");
    net_up->add_flag("--real-sockets", real_sockets, "bind one TCP listener per platform");
    net_up->add_option("--serve-ms", serve_ms, "serve for this long, 0 = until interrupted");

    // trace
    auto* trace = app.add_subcommand("trace", "trace a product's custody chain");
    std::string trace_product;
    QueryCli trace_opts;
    trace->add_option("product", trace_product, "product id")->required();
    trace->add_option("--home", trace_opts.home, "launching platform")->required();
    trace->add_option("--scenario", trace_opts.scenario_path, "scenario file")->required();
    trace->add_option("--seed", trace_opts.seed, "run seed");
    trace->add_option("--ttl", trace_opts.ttl, "hop budget");
    trace->add_flag("--partial", trace_opts.partial, "print interim reports per hop");
    trace->add_option("--format", trace_opts.format, "text|structured")
        ->check(CLI::IsMember({"text", "structured"}));

    // search
    auto* search = app.add_subcommand("search", "criteria search across firms");
    QueryCli search_opts;
    std::string s_type, s_supplier, s_visit;
    std::int64_t s_after = -1, s_before = -1;
    std::vector<std::string> s_attrs;
    search->add_option("--home", search_opts.home, "launching platform")->required();
    search->add_option("--scenario", search_opts.scenario_path, "scenario file")->required();
    search->add_option("--seed", search_opts.seed, "run seed");
    search->add_option("--ttl", search_opts.ttl, "hop budget");
    search->add_option("--type", s_type, "product category");
    search->add_option("--supplier", s_supplier, "producing firm");
    search->add_option("--made-after", s_after, "manufacture date lower bound, ms");
    search->add_option("--made-before", s_before, "manufacture date upper bound, ms");
    search->add_option("--attr", s_attrs, "attribute k=v; commercial.k targets commercial fields");
    search->add_option("--visit", s_visit, "explicit comma-separated visit list");
    search->add_flag("--partial", search_opts.partial, "print interim reports per hop");
    search->add_option("--format", search_opts.format, "text|structured")
        ->check(CLI::IsMember({"text", "structured"}));

    // bench
    auto* bench = app.add_subcommand("bench", "traffic benchmarks");
    auto* bench_compare = bench->add_subcommand("compare", "agent migration vs message exchange");
    std::string bc_scenario, bc_query;
    std::uint64_t bc_seed = 1;
    bench_compare->add_option("--scenario", bc_scenario, "scenario file")->required();
    bench_compare->add_option("--query", bc_query, "query file")->required();
    bench_compare->add_option("--seed", bc_seed, "run seed");
    auto* bench_gen = bench->add_subcommand("gen", "generate a benchmark scenario + query");
    std::string bg_out, bg_query_out;
    std::uint64_t bg_seed = 7;
    bench_gen->add_option("--out", bg_out, "scenario output file")->required();
    bench_gen->add_option("--query-out", bg_query_out, "query output file");
    bench_gen->add_option("--seed", bg_seed, "generator seed");

    // platform status
    auto* plat = app.add_subcommand("platform", "platform inspection");
    auto* plat_status = plat->add_subcommand("status", "registry snapshot after a run");
    std::string ps_firm, ps_scenario, ps_query;
    std::uint64_t ps_seed = 1;
    plat_status->add_option("firm", ps_firm, "firm id")->required();
    plat_status->add_option("--scenario", ps_scenario, "scenario file")->required();
    plat_status->add_option("--query", ps_query, "query file to run first");
    plat_status->add_option("--seed", ps_seed, "run seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (net_up->parsed()) {
            ScenarioData scenario = ingest_scenario_file(net_scenario);
            std::cout << "scenario ok: " << scenario.configs.size() << " firms, "
                      << scenario.links.size() << " links, " << scenario.catalog.size()
                      << " products, " << scenario.directory.size() << " tracked holders\n";
            if (!real_sockets) {
                return 0;
            }
            SocketHost host(std::move(scenario), net_seed);
            host.start();
            for (const auto& [firm, endpoint] : host.endpoints()) {
                std::cout << "listening " << firm << " at " << endpoint << "\n";
            }
            std::cout << (host.hello_mesh() ? "hello mesh: all peers reachable"
                                            : "hello mesh: some peers unreachable")
                      << "\n";
            std::signal(SIGINT, on_sigint);
            auto started = std::chrono::steady_clock::now();
            while (!g_interrupted) {
                std::this_thread::sleep_for(std::chrono::milliseconds(50));
                if (serve_ms > 0 &&
                    std::chrono::steady_clock::now() - started >=
                        std::chrono::milliseconds(serve_ms)) {
                    break;
                }
            }
            host.stop();
            return 0;
        }

        if (trace->parsed()) {
            SimRuntime runtime(ingest_scenario_file(trace_opts.scenario_path), trace_opts.seed);
            QueryRequest request;
            request.is_trace = true;
            request.product = trace_product;
            request.home = trace_opts.home;
            request.ttl = trace_opts.ttl;
            QueryTicket ticket = runtime.submit(request);
            return finish_query(runtime, ticket, trace_opts);
        }

        if (search->parsed()) {
            SimRuntime runtime(ingest_scenario_file(search_opts.scenario_path), search_opts.seed);
            QueryRequest request;
            request.is_trace = false;
            request.home = search_opts.home;
            request.ttl = search_opts.ttl;
            if (!s_type.empty()) request.criteria.category = s_type;
            if (!s_supplier.empty()) request.criteria.supplier = s_supplier;
            if (s_after >= 0) request.criteria.made_after = s_after;
            if (s_before >= 0) request.criteria.made_before = s_before;
            for (const auto& kv : s_attrs) {
                auto eq = kv.find('=');
                if (eq == std::string::npos || eq == 0) {
                    raise(Errc::BadRequest, "--attr expects k=v, got '" + kv + "'");
                }
                request.criteria.attribute_equals[kv.substr(0, eq)] = kv.substr(eq + 1);
            }
            if (!s_visit.empty()) {
                std::vector<FirmId> visit;
                std::stringstream ss(s_visit);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!item.empty()) visit.push_back(item);
                }
                request.visit = std::move(visit);
            }
            QueryTicket ticket = runtime.submit(request);
            return finish_query(runtime, ticket, search_opts);
        }

        if (bench_compare->parsed()) {
            ScenarioData scenario = ingest_scenario_file(bc_scenario);
            QueryRequest query = QueryRequest::from_doc(load_doc_file(bc_query));
            TrafficReport report = run_comparison(scenario, query, bc_seed);
            std::cout << canonical_encode(report.to_doc()) << "\n";
            std::cerr << "agent=" << report.agent_total << "B baseline=" << report.baseline_total
                      << "B ratio=" << report.ratio_num << "/" << report.ratio_den << "\n";
            return 0;
        }

        if (bench_gen->parsed()) {
            ScenarioData scenario = bench_scenario(bg_seed);
            std::ofstream out(bg_out, std::ios::binary);
            if (!out) {
                raise(Errc::BadRequest, "cannot write " + bg_out);
            }
            out << canonical_encode(scenario_to_doc(scenario));
            std::cout << "wrote " << bg_out << "\n";
            if (!bg_query_out.empty()) {
                std::ofstream qout(bg_query_out, std::ios::binary);
                if (!qout) {
                    raise(Errc::BadRequest, "cannot write " + bg_query_out);
                }
                qout << canonical_encode(bench_query(scenario).to_doc());
                std::cout << "wrote " << bg_query_out << "\n";
            }
            return 0;
        }

        if (plat_status->parsed()) {
            SimRuntime runtime(ingest_scenario_file(ps_scenario), ps_seed);
            if (!ps_query.empty()) {
                runtime.submit(QueryRequest::from_doc(load_doc_file(ps_query)));
                runtime.run();
            }
            print_registry(runtime.registry(ps_firm));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
