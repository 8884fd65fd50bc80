// remi: run the service or work directly on its data directory.

#include "remi/core/log.hpp"
#include "remi/knowledge/fetch.hpp"
#include "remi/prompt/prompt.hpp"
#include "remi/service/http.hpp"
#include "remi/service/service.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>

using namespace remi;

namespace {

struct Common {
    std::string config_path;
    std::string data_dir;
};

service::ServiceConfig resolve_config(const Common& c) {
    auto config = c.config_path.empty() ? service::parse_config(json::object()) : service::load_config(c.config_path);
    service::apply_env(config);
    if (!c.data_dir.empty()) config.data_dir = c.data_dir;
    log::set_level(log::parse_level(config.log_level));
    return config;
}

// Offline commands never run generation jobs.
service::ServiceOptions offline() {
    service::ServiceOptions o;
    o.resume_jobs = false;
    return o;
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::validation, path + " is not valid JSON: " + e.what());
    }
}

void write_output(const std::string& out, const std::string& bytes) {
    if (out.empty() || out == "-") {
        std::cout << bytes;
        return;
    }
    write_file_atomic(out, bytes);
}

int serve(const Common& common, const std::string& host, int port) {
    auto config = resolve_config(common);
    if (!host.empty()) config.host = host;
    if (port >= 0) config.port = port;

    // Signals are taken synchronously on a dedicated thread.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    service::Service svc(config);
    service::HttpServer server(svc);
    int bound = server.bind(config.host, config.port);
    std::cerr << "remi listening on " << config.host << ":" << bound << " (providers: " << svc.providers_mode()
              << ", data: " << config.data_dir.string() << ")\n";

    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        log::info("serve", "signal " + std::to_string(sig) + ", stopping");
        server.stop();
    });
    waiter.detach();
    server.listen();
    return 0;
}

int render_template(const Common& common, const std::string& name, const std::string& profile_path,
                    const std::string& mode, const std::string& kb_path, const std::string& slots_path,
                    std::size_t k, int year, const std::string& out) {
    auto config = resolve_config(common);
    auto library = prompt::PromptLibrary::load(config.resource_dir / "prompts" / "v1");
    if (name == "system") {
        if (profile_path.empty()) throw Error(ErrorCode::validation, "--profile is required for the system prompt");
        auto profile = read_json_file(profile_path).get<UserProfile>();
        KnowledgeBase kb;
        kb.user_id = profile.user_id;
        if (!kb_path.empty()) kb = read_json_file(kb_path).get<KnowledgeBase>();
        PersonaMode m;
        if (mode == "in_town")
            m = PersonaMode::in_town;
        else if (mode == "out_of_town")
            m = PersonaMode::out_of_town;
        else
            throw Error(ErrorCode::validation, "--mode must be in_town or out_of_town");
        write_output(out, prompt::assemble_system_prompt(m, profile, kb, {}, library, k, year));
        return 0;
    }
    if (!library.has(name)) throw Error(ErrorCode::not_found, "template " + name);
    text::Slots slots;
    if (!slots_path.empty()) {
        auto values = read_json_file(slots_path);
        if (!values.is_object()) throw Error(ErrorCode::validation, "--slots must hold a JSON object");
        for (const auto& [key, value] : values.items())
            slots[key] = value.is_string() ? value.get<std::string>() : value.dump();
    }
    write_output(out, library.get(name).render(slots));
    return 0;
}

int ingest_file(const Common& common, const std::string& user, const std::vector<std::string>& files,
                const std::string& title) {
    if (!title.empty() && files.size() != 1) throw Error(ErrorCode::validation, "--title needs exactly one file");
    std::vector<knowledge::Document> docs;
    for (const auto& f : files) {
        std::filesystem::path p(f);
        if (!std::filesystem::is_regular_file(p)) throw Error(ErrorCode::not_found, "file " + f);
        auto raw = read_file(p);
        auto ext = p.extension().string();
        knowledge::Document d;
        d.doc_id = "file:" + p.filename().string();
        d.title = title.empty() ? p.stem().string() : title;
        d.plain_text = ext == ".html" || ext == ".htm" ? knowledge::strip_html(raw) : raw;
        docs.push_back(std::move(d));
    }
    service::Service svc(resolve_config(common), offline());
    auto kb = svc.ingest_documents(user, docs);
    std::cout << "ingested " << docs.size() << " document(s); " << kb.facts.size() << " fact(s) for " << user
              << "\n";
    return 0;
}

int export_storybook(const Common& common, const std::string& user, const std::string& ordering,
                     const std::string& out) {
    service::Service svc(resolve_config(common), offline());
    auto doc = svc.storybook().export_storybook(user, storybook::parse_ordering(ordering));
    auto path = out.empty() ? doc.filename : out;
    write_file_atomic(path, doc.bytes);
    std::cout << path << " (" << doc.pages << " pages, " << doc.bytes.size() << " bytes)\n";
    return 0;
}

int list_sessions(const Common& common, const std::string& user) {
    service::Service svc(resolve_config(common), offline());
    auto sessions = svc.engine().list_sessions(user);
    std::printf("%-24s %-24s %-12s %-11s %5s  %s\n", "SESSION", "USER", "MODE", "STATUS", "TURNS", "CREATED");
    for (const auto& s : sessions) {
        std::printf("%-24s %-24s %-12s %-11s %5zu  %s\n", s.session_id.c_str(), s.user_id.c_str(),
                    std::string(to_string(s.mode)).c_str(), std::string(to_string(s.status)).c_str(),
                    s.transcript.size(), format_timestamp(s.created_at).c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RemiHaven reminiscence service"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("-c,--config", common.config_path, "Service config file (JSON)");
    app.add_option("-d,--data-dir", common.data_dir, "Data directory (overrides config and REMI_DATA_DIR)");

    std::string host;
    int port = -1;
    auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP API");
    serve_cmd->add_option("--host", host, "Listen address");
    serve_cmd->add_option("-p,--port", port, "Listen port (0 picks a free one)");

    std::string name, profile_path, mode = "in_town", kb_path, slots_path, out;
    std::size_t k = 6;
    int year = 0;
    auto* render_cmd = app.add_subcommand("render-template", "Expand a prompt template");
    render_cmd->add_option("name", name, "Template name, or 'system' for the assembled system prompt")->required();
    render_cmd->add_option("--profile", profile_path, "UserProfile JSON (system)");
    render_cmd->add_option("--mode", mode, "in_town | out_of_town (system)");
    render_cmd->add_option("--kb", kb_path, "KnowledgeBase JSON (system)");
    render_cmd->add_option("--k", k, "Facts to include (system)");
    render_cmd->add_option("--year", year, "Current year for era hints (system)");
    render_cmd->add_option("--slots", slots_path, "JSON object of slot values (other templates)");
    render_cmd->add_option("-o,--out", out, "Output file (default stdout)");

    std::string user, title, ordering = "position";
    std::vector<std::string> files;
    auto* ingest_cmd = app.add_subcommand("ingest-file", "Add text or HTML files to a user's knowledge base");
    ingest_cmd->add_option("--user", user, "User id")->required();
    ingest_cmd->add_option("--title", title, "Document title (single file)");
    ingest_cmd->add_option("files", files, "Files to ingest")->required();

    auto* export_cmd = app.add_subcommand("export-storybook", "Write a user's storybook PDF");
    export_cmd->add_option("--user", user, "User id")->required();
    export_cmd->add_option("--ordering", ordering, "position | created_at");
    export_cmd->add_option("-o,--out", out, "Output file (default storybook-<user>-<date>.pdf)");

    auto* list_cmd = app.add_subcommand("list-sessions", "List sessions, newest first");
    list_cmd->add_option("--user", user, "Only this user's sessions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*serve_cmd) return serve(common, host, port);
        if (*render_cmd) {
            if (year == 0) year = year_of(SystemClock().now());
            return render_template(common, name, profile_path, mode, kb_path, slots_path, k, year, out);
        }
        if (*ingest_cmd) return ingest_file(common, user, files, title);
        if (*export_cmd) return export_storybook(common, user, ordering, out);
        if (*list_cmd) return list_sessions(common, user);
    } catch (const Error& e) {
        std::cerr << "remi: " << e.what() << "\n";
        for (const auto& f : e.fields()) std::cerr << "  " << f.field << ": " << f.message << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "remi: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
