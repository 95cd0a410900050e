#include <filo/trace.hpp>

#include <fstream>
#include <istream>
#include <sstream>

#include <zlib.h>

#include <json.hpp>

namespace filo {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* repr_kind_code(ReprKind k) {
    switch (k) {
    case ReprKind::primitive: return "prim";
    case ReprKind::to_string: return "str";
    case ReprKind::dynamic_type_only: return "type";
    case ReprKind::void_return: return "void";
    }
    return "?";
}

std::optional<ReprKind> repr_kind_from_code(std::string_view code) {
    if (code == "prim") return ReprKind::primitive;
    if (code == "str") return ReprKind::to_string;
    if (code == "type") return ReprKind::dynamic_type_only;
    if (code == "void") return ReprKind::void_return;
    return std::nullopt;
}

TraceEvent parse_event_line(const std::string& line, std::size_t line_no) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    }
    if (!j.is_object())
        throw ParseError("event line is not a JSON object", line_no);

    TraceEvent ev;

    auto require = [&](const char* field) -> const json& {
        auto it = j.find(field);
        if (it == j.end())
            throw ParseError(std::string("missing field '") + field + "'", line_no);
        return *it;
    };

    const json& seq = require("seq");
    if (!seq.is_number_unsigned() && !(seq.is_number_integer() && seq.get<std::int64_t>() >= 0))
        throw ParseError("'seq' must be a non-negative integer", line_no);
    ev.seq = seq.get<std::uint64_t>();

    const json& kind = require("kind");
    if (!kind.is_string())
        throw ParseError("'kind' must be a string", line_no);
    const std::string kind_s = kind.get<std::string>();
    if (kind_s == "b")
        ev.kind = EventKind::begin;
    else if (kind_s == "e")
        ev.kind = EventKind::end;
    else
        throw ParseError("'kind' must be \"b\" or \"e\"", line_no);

    const json& method = require("method");
    if (!method.is_string())
        throw ParseError("'method' must be a string", line_no);
    ev.method.name = method.get<std::string>();
    if (ev.method.name.empty())
        throw ParseError("'method' must be non-empty", line_no);

    if (auto it = j.find("sig"); it != j.end()) {
        if (!it->is_string())
            throw ParseError("'sig' must be a string", line_no);
        ev.method.signature = it->get<std::string>();
    }

    const json& dir = require("dir");
    if (!dir.is_string())
        throw ParseError("'dir' must be a string", line_no);
    const std::string dir_s = dir.get<std::string>();
    if (dir_s == "api")
        ev.direction = Direction::api_call;
    else if (dir_s == "cb")
        ev.direction = Direction::callback;
    else
        throw ParseError("'dir' must be \"api\" or \"cb\"", line_no);

    if (auto it = j.find("ret"); it != j.end()) {
        if (ev.kind != EventKind::end)
            throw ParseError("'ret' is only legal on end events", line_no);
        if (!it->is_object())
            throw ParseError("'ret' must be an object", line_no);
        auto kit = it->find("k");
        if (kit == it->end() || !kit->is_string())
            throw ParseError("'ret.k' must be a string", line_no);
        auto kind_code = repr_kind_from_code(kit->get<std::string>());
        if (!kind_code)
            throw ParseError("'ret.k' must be one of prim|str|type|void", line_no);
        ReturnValue rv;
        rv.kind = *kind_code;
        if (auto vit = it->find("v"); vit != it->end()) {
            if (!vit->is_string())
                throw ParseError("'ret.v' must be a string", line_no);
            rv.repr = vit->get<std::string>();
        }
        if (rv.kind == ReprKind::void_return && !rv.repr.empty())
            throw ParseError("void return must have an empty repr", line_no);
        ev.ret = std::move(rv);
    }

    if (auto it = j.find("stack"); it != j.end()) {
        if (ev.kind != EventKind::begin)
            throw ParseError("'stack' is only legal on begin events", line_no);
        if (!it->is_array())
            throw ParseError("'stack' must be an array of strings", line_no);
        StackSnapshot s;
        s.frames.reserve(it->size());
        for (const auto& f : *it) {
            if (!f.is_string())
                throw ParseError("'stack' must be an array of strings", line_no);
            s.frames.push_back(f.get<std::string>());
        }
        if (s.frames.empty())
            throw ParseError("'stack' must be non-empty when present", line_no);
        ev.stack = std::move(s);
    }

    return ev;
}

void serialize_event(const TraceEvent& ev, std::ostream& out) {
    ordered_json j;
    j["seq"] = ev.seq;
    j["kind"] = ev.kind == EventKind::begin ? "b" : "e";
    j["method"] = ev.method.name;
    if (ev.method.signature)
        j["sig"] = *ev.method.signature;
    j["dir"] = ev.direction == Direction::api_call ? "api" : "cb";
    if (ev.ret) {
        ordered_json r;
        r["k"] = repr_kind_code(ev.ret->kind);
        r["v"] = ev.ret->repr;
        j["ret"] = std::move(r);
    }
    if (ev.stack)
        j["stack"] = ev.stack->frames;
    out << j.dump() << '\n';
}

} // namespace

std::vector<std::string> default_framework_prefixes() {
    return {"android.", "androidx.", "java.", "javax.", "kotlin."};
}

Origin classify_origin(std::string_view name, std::span<const std::string> framework_prefixes) {
    if (framework_prefixes.empty())
        throw ParameterError("framework prefix list must be non-empty");
    for (const auto& prefix : framework_prefixes)
        if (name.substr(0, prefix.size()) == prefix)
            return Origin::framework;
    return Origin::application;
}

std::string diff_key(const TraceEvent& event, KeyPolicy policy) {
    std::string key;
    key.reserve(event.method.name.size() + 24);
    key += event.kind == EventKind::begin ? 'b' : 'e';
    key += '|';
    key += event.direction == Direction::api_call ? "api" : "cb";
    key += '|';
    key += event.method.name;
    if (event.method.signature) {
        key += "|s=";
        key += *event.method.signature;
    }
    if (policy == KeyPolicy::full && event.ret) {
        key += "|r=";
        key += repr_kind_code(event.ret->kind);
        key += ':';
        key += event.ret->repr;
    }
    return key;
}

Trace parse_trace(std::istream& input, TraceLabel label) {
    Trace trace;
    trace.label = label;
    std::string line;
    std::size_t line_no = 0;
    bool have_prev = false;
    std::uint64_t prev_seq = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos)
            continue;
        TraceEvent ev = parse_event_line(line, line_no);
        if (have_prev && ev.seq <= prev_seq)
            throw StructureError("line " + std::to_string(line_no) + ": seq " +
                                 std::to_string(ev.seq) + " does not increase (previous " +
                                 std::to_string(prev_seq) + ")");
        prev_seq = ev.seq;
        have_prev = true;
        trace.events.push_back(std::move(ev));
    }
    return trace;
}

Trace parse_trace(std::string_view text, TraceLabel label) {
    std::istringstream in{std::string(text)};
    return parse_trace(in, label);
}

void serialize_trace(const Trace& trace, std::ostream& out) {
    for (const auto& ev : trace.events)
        serialize_event(ev, out);
}

std::string serialize_trace(const Trace& trace) {
    std::ostringstream out;
    serialize_trace(trace, out);
    return out.str();
}

Trace load_trace_file(const std::filesystem::path& path, TraceLabel label) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ParseError("cannot open trace file: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() >= 2 && static_cast<unsigned char>(data[0]) == 0x1f &&
        static_cast<unsigned char>(data[1]) == 0x8b)
        data = gzip_decompress(data);
    Trace t = parse_trace(std::string_view(data), label);
    t.metadata["source"] = path.string();
    return t;
}

std::string gzip_compress(std::string_view data) {
    z_stream strm{};
    if (deflateInit2(&strm, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 16 + MAX_WBITS, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK)
        throw std::runtime_error("deflateInit2 failed");
    std::string out;
    out.resize(deflateBound(&strm, data.size()));
    strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    strm.avail_in = static_cast<uInt>(data.size());
    strm.next_out = reinterpret_cast<Bytef*>(out.data());
    strm.avail_out = static_cast<uInt>(out.size());
    int rc = deflate(&strm, Z_FINISH);
    deflateEnd(&strm);
    if (rc != Z_STREAM_END)
        throw std::runtime_error("gzip compression failed");
    out.resize(out.size() - strm.avail_out);
    return out;
}

std::string gzip_decompress(std::string_view data) {
    z_stream strm{};
    if (inflateInit2(&strm, 16 + MAX_WBITS) != Z_OK)
        throw std::runtime_error("inflateInit2 failed");
    strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    strm.avail_in = static_cast<uInt>(data.size());
    std::string out;
    std::string chunk(1 << 16, '\0');
    int rc = Z_OK;
    while (rc != Z_STREAM_END) {
        strm.next_out = reinterpret_cast<Bytef*>(chunk.data());
        strm.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&strm, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&strm);
            throw ParseError("corrupt gzip stream");
        }
        out.append(chunk.data(), chunk.size() - strm.avail_out);
    }
    inflateEnd(&strm);
    return out;
}

std::vector<Diagnostic> validate_trace(const Trace& trace, const ValidationOptions& options) {
    std::vector<Diagnostic> diags;
    auto error = [&](std::uint64_t seq, std::string msg) {
        diags.push_back({Diagnostic::Severity::error, seq, true, std::move(msg)});
    };
    auto warning = [&](std::uint64_t seq, bool has_seq, std::string msg) {
        diags.push_back({Diagnostic::Severity::warning, seq, has_seq, std::move(msg)});
    };

    std::vector<const TraceEvent*> open;
    for (const auto& ev : trace.events) {
        if (ev.method.name.find('.') == std::string::npos)
            warning(ev.seq, true, "method name '" + ev.method.name + "' is not fully qualified");

        Origin origin = classify_origin(ev.method.name, options.framework_prefixes);
        if (ev.direction == Direction::api_call && origin != Origin::framework)
            error(ev.seq, "api call targets non-framework method " + ev.method.name);
        if (ev.direction == Direction::callback && origin != Origin::application)
            error(ev.seq, "callback targets non-application method " + ev.method.name);

        if (ev.kind == EventKind::begin) {
            if (ev.stack && ev.stack->frames.front() != options.root_name)
                error(ev.seq, "stack root is '" + ev.stack->frames.front() + "', expected '" +
                                  options.root_name + "'");
            open.push_back(&ev);
        } else {
            if (open.empty()) {
                error(ev.seq, "end of " + ev.method.name + " before any begin");
            } else if (open.back()->method != ev.method) {
                error(ev.seq, "end of " + ev.method.name + " does not match open begin of " +
                                  open.back()->method.name + " (seq " +
                                  std::to_string(open.back()->seq) + ")");
                // resync if this end closes an outer open call
                for (auto it = open.rbegin(); it != open.rend(); ++it) {
                    if ((*it)->method == ev.method) {
                        open.erase(std::next(it).base(), open.end());
                        break;
                    }
                }
            } else {
                open.pop_back();
            }
        }
    }
    if (!open.empty())
        warning(open.back()->seq, true,
                std::to_string(open.size()) +
                    " boundary call(s) left open at end of trace (truncated trace)");
    return diags;
}

} // namespace filo
