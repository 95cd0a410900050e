#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <filo/errors.hpp>

namespace filo {

enum class EventKind { begin, end };
enum class Direction { api_call, callback };
enum class Origin { application, framework };
enum class ReprKind { primitive, to_string, dynamic_type_only, void_return };
enum class KeyPolicy { full, no_return };
enum class TraceLabel { baseline, failure };

/// Fully-qualified method identity (package + class + method, optional
/// parameter-type list). Framework/application origin is not stored: it is a
/// function of the configured prefix list, see classify_origin().
struct MethodId {
    std::string name;
    std::optional<std::string> signature;

    bool operator==(const MethodId&) const = default;
};

struct ReturnValue {
    ReprKind kind = ReprKind::void_return;
    std::string repr; // empty for void

    bool operator==(const ReturnValue&) const = default;
};

/// Call stack at the time a boundary call begins, outermost frame first.
/// frames[0] is the process-entry method; the last frame is the invoked
/// method itself.
struct StackSnapshot {
    std::vector<std::string> frames;

    bool operator==(const StackSnapshot&) const = default;
};

/// One boundary-call record. A call crossing the app/framework border
/// produces two events: begin and end. Return values only appear on end
/// events, stack snapshots only on begin events.
struct TraceEvent {
    std::uint64_t seq = 0;
    EventKind kind = EventKind::begin;
    MethodId method;
    Direction direction = Direction::api_call;
    std::optional<ReturnValue> ret;     // end events only
    std::optional<StackSnapshot> stack; // begin events only

    bool operator==(const TraceEvent&) const = default;
};

/// Ordered boundary-call sequence. seq values strictly increase; begin/end
/// nesting is *not* a parse precondition (crashes truncate failure traces)
/// and is checked separately by validate_trace(). metadata is runtime
/// provenance (source path, app name) and is not part of the stream format.
struct Trace {
    std::vector<TraceEvent> events;
    TraceLabel label = TraceLabel::baseline;
    std::map<std::string, std::string> metadata;

    bool empty() const { return events.empty(); }
};

inline constexpr const char* kDefaultRootMethod = "com.android.internal.os.ZygoteInit.main";

/// Package prefixes treated as framework code when no explicit list is given.
std::vector<std::string> default_framework_prefixes();

/// framework iff name starts with any prefix; application otherwise.
/// Throws ParameterError when the prefix list is empty.
Origin classify_origin(std::string_view name, std::span<const std::string> framework_prefixes);

/// Deterministic line identity used by the trace diff. Under KeyPolicy::full
/// the return representation participates in the key; under no_return it is
/// dropped, so two end events differing only in their return repr compare
/// equal. The key never includes seq.
std::string diff_key(const TraceEvent& event, KeyPolicy policy);

/// Parses the line-oriented trace format (one JSON object per line, UTF-8).
/// Empty input is legal and yields an empty trace. Unknown fields are
/// ignored. Malformed lines raise ParseError with the line number;
/// out-of-order seq values raise StructureError.
Trace parse_trace(std::istream& input, TraceLabel label);
Trace parse_trace(std::string_view text, TraceLabel label);

/// Canonical serialization; parse_trace(serialize_trace(t)) reproduces the
/// event list exactly, and re-serializing a parsed canonical file is
/// byte-identical.
void serialize_trace(const Trace& trace, std::ostream& out);
std::string serialize_trace(const Trace& trace);

/// Reads a trace file, transparently inflating gzip input (magic bytes).
Trace load_trace_file(const std::filesystem::path& path, TraceLabel label);

std::string gzip_compress(std::string_view data);
std::string gzip_decompress(std::string_view data);

struct Diagnostic {
    enum class Severity { warning, error };
    Severity severity = Severity::error;
    std::uint64_t seq = 0;
    bool has_seq = false;
    std::string message;
};

struct ValidationOptions {
    std::vector<std::string> framework_prefixes = default_framework_prefixes();
    std::string root_name = kDefaultRootMethod;
};

/// Structural checks beyond parsing: begin/end nesting, stack roots,
/// direction/origin consistency. Unclosed begin events at end of input are
/// reported as warnings, not errors, because a crash truncates the failure
/// trace mid-call.
std::vector<Diagnostic> validate_trace(const Trace& trace, const ValidationOptions& options);

} // namespace filo
