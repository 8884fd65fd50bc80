#include "remi/service/http.hpp"

#include "remi/core/log.hpp"

#include <httplib.h>

#include <sstream>

namespace remi::service {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found: return 404;
        case ErrorCode::conflict: return 409;
        case ErrorCode::precondition: return 412;
        case ErrorCode::validation: return 422;
        case ErrorCode::unauthorized: return 401;
        case ErrorCode::forbidden: return 403;
        case ErrorCode::provider: return 502;
        case ErrorCode::io: return 500;
    }
    return 500;
}

json error_body(ErrorCode code, const std::string& message, const std::vector<FieldError>& fields) {
    json f = json::array();
    for (const auto& e : fields) f.push_back({{"field", e.field}, {"code", e.code}, {"message", e.message}});
    return {{"error", {{"code", to_string(code)}, {"message", message}, {"fields", f}}}};
}

namespace {

using Req = httplib::Request;
using Res = httplib::Response;

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void send(Res& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(Res& res, int status, ErrorCode code, const std::string& message,
                const std::vector<FieldError>& fields = {}) {
    send(res, status, error_body(code, message, fields));
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const Req& req, Res& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_error(res, http_status(e.code()), e.code(), e.what(), e.fields());
        } catch (const BadRequest& e) {
            send(res, 400, error_body(ErrorCode::validation, e.what(), {{"body", "malformed_json", e.what()}}));
        } catch (const std::exception& e) {
            log::error("http", req.method + " " + req.path + ": " + e.what());
            send_error(res, 500, ErrorCode::io, "internal error");
        }
    };
}

json body_of(const Req& req) {
    if (req.body.empty()) return json::object();
    try {
        auto j = json::parse(req.body);
        if (!j.is_object()) throw BadRequest("request body must be a JSON object");
        return j;
    } catch (const json::parse_error& e) {
        throw BadRequest(std::string("malformed JSON: ") + e.what());
    }
}

// Typed field access reporting the offending field on failure.
template <typename T>
std::optional<T> field(const json& body, const std::string& key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    try {
        return body[key].get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::validation, "invalid field " + key, {{key, "invalid", e.what()}});
    }
}

template <typename T>
T required(const json& body, const std::string& key) {
    auto v = field<T>(body, key);
    if (!v) throw Error(ErrorCode::validation, "missing field " + key, {{key, "required", "is required"}});
    return *v;
}

std::string bearer(const Req& req) {
    auto h = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (h.rfind(prefix, 0) != 0) throw Error(ErrorCode::unauthorized, "missing bearer token");
    return h.substr(prefix.size());
}

std::string param(const Req& req, std::size_t i) { return req.matches[static_cast<int>(i)].str(); }

PersonaMode parse_mode(const std::string& s) {
    if (s == "in_town") return PersonaMode::in_town;
    if (s == "out_of_town") return PersonaMode::out_of_town;
    throw Error(ErrorCode::validation, "unknown mode " + s, {{"mode", "invalid", "expected in_town or out_of_town"}});
}

}  // namespace

HttpServer::HttpServer(Service& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
        if (port_ < 0) throw Error(ErrorCode::io, "cannot bind to " + host);
    } else {
        if (!server_->bind_to_port(host, port))
            throw Error(ErrorCode::io, "cannot listen on " + host + ":" + std::to_string(port) +
                                           " (address in use or not permitted)");
        port_ = port;
    }
    return port_;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::start() {
    thread_ = std::thread([this] { listen(); });
    server_->wait_until_ready();
}

void HttpServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

void HttpServer::routes() {
    auto& s = service_;
    auto& srv = *server_;
    srv.set_payload_max_length(64 * 1024 * 1024);
    // The library default adds SO_REUSEPORT, which lets a second server
    // silently share a busy port.
    srv.set_socket_options([](socket_t sock) {
        int yes = 1;
        setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });

    auto user_of = [&s](const Req& req) { return s.authenticate(bearer(req)); };
    // Paths naming a user must name the caller.
    auto owner = [user_of](const Req& req, const std::string& user_id) {
        auto me = user_of(req);
        if (me != user_id) throw Error(ErrorCode::forbidden, "token does not grant access to " + user_id);
        return me;
    };

    srv.Get("/health", guarded([&s](const Req&, Res& res) {
                send(res, 200, {{"status", "ok"}, {"providers_mode", s.providers_mode()}});
            }));

    // Profiles and knowledge ---------------------------------------------

    srv.Post("/profiles", guarded([&s](const Req& req, Res& res) {
                 auto created = s.create_profile(body_of(req));
                 json warnings = json::array();
                 for (const auto& w : created.warnings)
                     warnings.push_back({{"field", w.field}, {"code", w.code}, {"message", w.message}});
                 send(res, 201, {{"profile", created.profile}, {"token", created.token}, {"warnings", warnings}});
             }));

    srv.Get(R"(/profiles/([^/]+))", guarded([&s, owner](const Req& req, Res& res) {
                auto uid = owner(req, param(req, 1));
                send(res, 200, json(s.get_profile(uid)));
            }));

    srv.Post(R"(/profiles/([^/]+)/knowledge)", guarded([&s, owner](const Req& req, Res& res) {
                 auto uid = owner(req, param(req, 1));
                 auto body = body_of(req);
                 KnowledgeBase kb;
                 if (auto titles = field<std::vector<std::string>>(body, "titles")) {
                     kb = s.ingest_titles(uid, *titles);
                 } else {
                     auto docs = required<std::vector<knowledge::Document>>(body, "documents");
                     if (docs.empty())
                         throw Error(ErrorCode::validation, "no documents",
                                     {{"documents", "required", "at least one document"}});
                     kb = s.ingest_documents(uid, docs);
                 }
                 send(res, 200, json(kb));
             }));

    srv.Get(R"(/profiles/([^/]+)/knowledge)", guarded([&s, owner](const Req& req, Res& res) {
                auto uid = owner(req, param(req, 1));
                auto kb = s.knowledge_base(uid);
                if (req.has_param("q")) {
                    std::vector<std::string> terms;
                    std::istringstream in(req.get_param_value("q"));
                    for (std::string t; in >> t;) terms.push_back(t);
                    std::size_t k = s.config().conversation.k;
                    if (req.has_param("k")) {
                        auto v = req.get_param_value("k");
                        if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
                            throw Error(ErrorCode::validation, "k must be a number", {{"k", "invalid", v}});
                        k = std::stoul(v);
                    }
                    kb.facts = knowledge::retrieve(kb, terms, k, 1);
                }
                send(res, 200, json(kb));
            }));

    // Sessions -------------------------------------------------------------

    srv.Post("/sessions", guarded([&s, user_of](const Req& req, Res& res) {
                 auto uid = user_of(req);
                 auto body = body_of(req);
                 auto mode = parse_mode(required<std::string>(body, "mode"));
                 send(res, 201, json(s.engine().start_session(uid, mode)));
             }));

    srv.Get("/sessions", guarded([&s, user_of](const Req& req, Res& res) {
                send(res, 200, json(s.engine().list_sessions(user_of(req))));
            }));

    srv.Get(R"(/sessions/([^/]+))", guarded([&s, user_of](const Req& req, Res& res) {
                send(res, 200, json(s.session_for(user_of(req), param(req, 1))));
            }));

    srv.Post(R"(/sessions/([^/]+)/cancel)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto sid = s.session_for(user_of(req), param(req, 1)).session_id;
                 s.engine().cancel_stream(sid);
                 send(res, 200, {{"cancelled", true}});
             }));

    srv.Post(R"(/sessions/([^/]+)/close)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto sid = s.session_for(user_of(req), param(req, 1)).session_id;
                 s.engine().close_session(sid);
                 send(res, 200, json(s.engine().get_session(sid)));
             }));

    // Newline-delimited JSON: {"delta": "..."} lines, then one line with
    // done:true carrying the turn indices, readiness and any offer.
    srv.Post(R"(/sessions/([^/]+)/turns)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto session = s.session_for(user_of(req), param(req, 1));
                 if (session.status == SessionStatus::closed) throw Error(ErrorCode::conflict, "session is closed");
                 auto body = body_of(req);
                 conversation::TurnInput input;
                 input.text = field<std::string>(body, "text").value_or("");
                 input.audio_ref = field<std::string>(body, "audio_ref");
                 if (input.text.empty() && !input.audio_ref)
                     throw Error(ErrorCode::validation, "empty turn",
                                 {{"text", "required", "text or audio_ref is required"}});
                 auto sid = session.session_id;
                 res.status = 200;
                 res.set_chunked_content_provider(
                     "application/x-ndjson", [&s, sid, input](std::size_t, httplib::DataSink& sink) {
                         auto write_line = [&sink](const json& j) {
                             auto line = j.dump() + "\n";
                             return sink.write(line.data(), line.size());
                         };
                         json done{{"done", true}};
                         try {
                             auto result = s.engine().submit_user_turn(sid, input, [&](std::string_view chunk) {
                                 if (!write_line({{"delta", chunk}}))
                                     throw std::runtime_error("client disconnected");
                             });
                             done["turn_index"] = result.assistant_turn.turn_index;
                             done["user_turn_index"] = result.user_turn.turn_index;
                             done["readiness_score"] = result.readiness_score;
                             if (result.assistant_turn.error) done["error"] = *result.assistant_turn.error;
                             if (result.offer_turn)
                                 done["offer"] = {{"turn_index", result.offer_turn->turn_index},
                                                  {"text", result.offer_turn->text}};
                         } catch (const Error& e) {
                             done["error"] = std::string(to_string(e.code())) + ": " + e.what();
                             done["status"] = http_status(e.code());
                         } catch (const std::exception& e) {
                             done["error"] = std::string("internal: ") + e.what();
                         }
                         write_line(done);
                         sink.done();
                         return true;
                     });
             }));

    srv.Post(R"(/sessions/([^/]+)/generation)", guarded([&s, user_of](const Req& req, Res& res) {
                 send(res, 202, json(s.request_generation(user_of(req), param(req, 1))));
             }));

    srv.Get(R"(/jobs/([^/]+))", guarded([&s, user_of](const Req& req, Res& res) {
                send(res, 200, json(s.job_for(user_of(req), param(req, 1))));
            }));

    // Materials --------------------------------------------------------------

    srv.Get(R"(/materials/([^/]+))", guarded([&s, user_of](const Req& req, Res& res) {
                send(res, 200, json(s.material_for(user_of(req), param(req, 1))));
            }));

    srv.Post(R"(/materials/([^/]+)/edits)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto mid = s.material_for(user_of(req), param(req, 1)).material_id;
                 auto body = body_of(req);
                 auto candidate = s.generator().edit_image(mid, required<std::string>(body, "candidate_ref"),
                                                           required<MaskRegion>(body, "mask"),
                                                           field<std::string>(body, "instruction").value_or(""));
                 send(res, 201, {{"candidate", candidate}, {"material", s.generator().get_material(mid)}});
             }));

    srv.Post(R"(/materials/([^/]+)/redraws)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto mid = s.material_for(user_of(req), param(req, 1)).material_id;
                 auto body = body_of(req);
                 generation::RedrawRequest r{field<ImagePrompt>(body, "prompt"), field<std::string>(body, "feedback")};
                 auto candidate = s.generator().redraw_image(mid, r);
                 send(res, 201, {{"candidate", candidate}, {"material", s.generator().get_material(mid)}});
             }));

    srv.Post(R"(/materials/([^/]+)/selection)", guarded([&s, user_of](const Req& req, Res& res) {
                 auto mid = s.material_for(user_of(req), param(req, 1)).material_id;
                 auto index = required<std::int64_t>(body_of(req), "index");
                 send(res, 200, json(s.generator().select_candidate(mid, index)));
             }));

    srv.Put(R"(/materials/([^/]+)/narrative)", guarded([&s, user_of](const Req& req, Res& res) {
                auto mid = s.material_for(user_of(req), param(req, 1)).material_id;
                auto narrative = s.generator().edit_narrative(mid, required<std::string>(body_of(req), "body"));
                send(res, 200, json(narrative));
            }));

    // Media and speech ---------------------------------------------------------

    srv.Post("/media", guarded([&s, user_of](const Req& req, Res& res) {
                 user_of(req);
                 if (req.body.empty())
                     throw Error(ErrorCode::validation, "empty upload", {{"body", "required", "no bytes"}});
                 auto ref = s.media().put(req.body);
                 send(res, 201, {{"ref", ref}, {"mime", media::sniff_mime(req.body)}, {"size", req.body.size()}});
             }));

    srv.Get(R"(/media/([0-9a-f]{64}))", guarded([&s, user_of](const Req& req, Res& res) {
                user_of(req);
                auto bytes = s.media().require(param(req, 1));
                res.status = 200;
                res.set_header("Cache-Control", "private, max-age=31536000, immutable");
                res.set_content(bytes, media::sniff_mime(bytes));
            }));

    srv.Post("/speech/transcriptions", guarded([&s, user_of](const Req& req, Res& res) {
                 auto uid = user_of(req);
                 auto body = body_of(req);
                 auto audio = s.media().require(required<std::string>(body, "audio_ref"));
                 auto locale = field<std::string>(body, "locale").value_or(s.get_profile(uid).locale);
                 send(res, 200, {{"text", s.generator().transcribe(audio, locale)}});
             }));

    srv.Post("/speech/syntheses", guarded([&s, user_of](const Req& req, Res& res) {
                 user_of(req);
                 auto body = body_of(req);
                 auto r = s.generator().synthesize(required<std::string>(body, "text"),
                                                   field<std::string>(body, "voice").value_or(""));
                 json out{{"audio_ref", r.audio_ref}, {"mime", r.mime}, {"voice", r.voice}};
                 if (r.warning) out["warning"] = *r.warning;
                 send(res, 201, out);
             }));

    // Storybook ------------------------------------------------------------------

    srv.Get(R"(/profiles/([^/]+)/storybook)", guarded([&s, owner](const Req& req, Res& res) {
                send(res, 200, json(s.storybook().get(owner(req, param(req, 1)))));
            }));

    srv.Post(R"(/profiles/([^/]+)/storybook/entries)", guarded([&s, owner](const Req& req, Res& res) {
                 auto uid = owner(req, param(req, 1));
                 auto body = body_of(req);
                 auto entry = s.storybook().save_entry(uid, required<std::string>(body, "material_id"),
                                                       field<std::string>(body, "caption").value_or(""));
                 send(res, 201, json(entry));
             }));

    srv.Patch(R"(/profiles/([^/]+)/storybook/entries/([^/]+))", guarded([&s, owner](const Req& req, Res& res) {
                  auto uid = owner(req, param(req, 1));
                  auto body = body_of(req);
                  storybook::EntryUpdate u{field<std::string>(body, "caption"), field<std::string>(body, "narrative")};
                  send(res, 200, json(s.storybook().update_entry(uid, param(req, 2), u)));
              }));

    srv.Delete(R"(/profiles/([^/]+)/storybook/entries/([^/]+))", guarded([&s, owner](const Req& req, Res& res) {
                   auto uid = owner(req, param(req, 1));
                   s.storybook().delete_entry(uid, param(req, 2));
                   send(res, 200, json(s.storybook().get(uid)));
               }));

    srv.Put(R"(/profiles/([^/]+)/storybook/entries/([^/]+)/position)",
            guarded([&s, owner](const Req& req, Res& res) {
                auto uid = owner(req, param(req, 1));
                auto position = required<std::int64_t>(body_of(req), "position");
                if (position < 0)
                    throw Error(ErrorCode::validation, "position out of range",
                                {{"position", "out_of_range", "must be >= 0"}});
                send(res, 200,
                     json(s.storybook().reorder(uid, param(req, 2), static_cast<std::size_t>(position))));
            }));

    srv.Get(R"(/profiles/([^/]+)/storybook/export)", guarded([&s, owner](const Req& req, Res& res) {
                auto uid = owner(req, param(req, 1));
                auto ordering = storybook::parse_ordering(
                    req.has_param("ordering") ? req.get_param_value("ordering") : "position");
                auto doc = s.storybook().export_storybook(uid, ordering);
                res.status = 200;
                res.set_header("Content-Disposition", "attachment; filename=\"" + doc.filename + "\"");
                res.set_content(doc.bytes, "application/pdf");
            }));

    srv.set_error_handler([](const Req& req, Res& res) {
        if (!res.body.empty()) return;
        if (res.status == 404)
            send_error(res, 404, ErrorCode::not_found, "no route for " + req.method + " " + req.path);
    });
}

}  // namespace remi::service
