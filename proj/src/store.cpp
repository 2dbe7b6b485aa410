#include "ac4a/store.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <ctime>
#include <random>

namespace ac4a {

namespace {

constexpr std::array<std::pair<AuditKind, std::string_view>, 6> kKindNames{{
    {AuditKind::PermCreated, "perm_created"},
    {AuditKind::PermRemoved, "perm_removed"},
    {AuditKind::AccessAllowed, "access_allowed"},
    {AuditKind::AccessDenied, "access_denied"},
    {AuditKind::ModeChanged, "mode_changed"},
    {AuditKind::PermAutoDeployed, "perm_auto_deployed"},
}};

Json header_json() { return Json{{"format", "ac4a-audit"}, {"version", kAuditFormatVersion}}; }

}  // namespace

std::string_view to_string(AuditKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "access_denied";
}

AuditKind parse_audit_kind(std::string_view text) {
    for (const auto& [k, name] : kKindNames)
        if (name == text) return k;
    throw FormatError("unknown audit kind '" + std::string(text) + "'");
}

std::string_view to_string(Actor actor) {
    switch (actor) {
        case Actor::User: return "user";
        case Actor::System: return "system";
        case Actor::Agent: return "agent";
    }
    return "system";
}

Actor parse_actor(std::string_view text) {
    if (text == "user") return Actor::User;
    if (text == "system") return Actor::System;
    if (text == "agent") return Actor::Agent;
    throw FormatError("unknown actor '" + std::string(text) + "'");
}

Json audit_record_to_json(const AuditRecord& r) {
    return Json{{"seq", r.seq},
                {"timestamp", r.timestamp},
                {"kind", std::string(to_string(r.kind))},
                {"subject", r.subject},
                {"detail", r.detail},
                {"actor", std::string(to_string(r.actor))}};
}

AuditRecord audit_record_from_json(const Json& j) {
    if (!j.is_object()) throw FormatError("audit record must be an object");
    for (const char* key : {"seq", "timestamp", "kind", "subject", "detail", "actor"})
        if (!j.contains(key)) throw FormatError(std::string("audit record is missing '") + key + "'");
    AuditRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.timestamp = j.at("timestamp").get<std::string>();
    r.kind = parse_audit_kind(j.at("kind").get<std::string>());
    r.subject = j.at("subject").get<std::string>();
    r.detail = j.at("detail");
    r.actor = parse_actor(j.at("actor").get<std::string>());
    return r;
}

std::vector<AuditRecord> read_audit_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw StorageError("cannot open audit file " + file.string());
    std::vector<AuditRecord> records;
    std::string line;
    std::size_t lineno = 0;
    std::uint64_t last = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto where = file.string() + ":" + std::to_string(lineno);
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw FormatError(where + ": " + e.what());
        }
        if (lineno == 1) {
            if (!j.is_object() || j.value("format", "") != "ac4a-audit")
                throw FormatError(where + ": missing ac4a-audit header");
            if (j.value("version", 0) != kAuditFormatVersion)
                throw FormatError(where + ": unsupported audit format version");
            continue;
        }
        try {
            auto r = audit_record_from_json(j);
            if (r.seq <= last) throw FormatError("seq " + std::to_string(r.seq) + " does not increase");
            last = r.seq;
            records.push_back(std::move(r));
        } catch (const Error& e) {
            throw FormatError(where + ": " + e.what());
        } catch (const Json::exception& e) {
            throw FormatError(where + ": " + e.what());
        }
    }
    if (lineno == 0) throw FormatError(file.string() + ":1: empty audit file");
    return records;
}

std::int64_t now_millis() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string now_iso8601() {
    const auto ms = now_millis();
    const std::time_t secs = ms / 1000;
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
    char out[40];
    std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms % 1000));
    return out;
}

// ULID layout: 48-bit millisecond time then 80 random bits, Crockford base32.
// Ids minted within one millisecond increment the random part so they sort.
std::string new_permission_id() {
    static constexpr char kAlphabet[] = "0123456789ABCDEFGHJKMNPQRSTVWXYZ";
    static std::mutex mutex;
    static std::mt19937_64 rng{std::random_device{}()};
    static std::uint64_t last_ms = 0;
    static std::uint64_t hi = 0, lo = 0;  // 16 + 64 random bits

    std::lock_guard lock(mutex);
    auto ms = static_cast<std::uint64_t>(now_millis());
    if (ms <= last_ms) {
        ms = last_ms;
        if (++lo == 0) hi = (hi + 1) & 0xFFFF;
    } else {
        last_ms = ms;
        hi = rng() & 0xFFFF;
        lo = rng();
    }
    std::string id(26, '0');
    for (int i = 9; i >= 0; --i) {
        id[i] = kAlphabet[ms & 31];
        ms >>= 5;
    }
    // 80 random bits as 16 base32 digits, most significant first.
    std::uint64_t h = hi, l = lo;
    for (int i = 25; i >= 10; --i) {
        id[i] = kAlphabet[l & 31];
        l = (l >> 5) | ((h & 31) << 59);
        h >>= 5;
    }
    return id;
}

AuditLog::AuditLog(std::filesystem::path file) : path_(std::move(file)) {
    const bool existing = std::filesystem::exists(*path_) && std::filesystem::file_size(*path_) > 0;
    if (existing) records_ = read_audit_file(*path_);
    out_.open(*path_, std::ios::app);
    if (!out_) throw StorageError("cannot open audit file " + path_->string() + " for writing");
    if (!existing) {
        out_ << header_json().dump() << '\n';
        out_.flush();
    }
}

AuditLog::AuditLog(std::vector<AuditRecord> seed) : records_(std::move(seed)) {}

std::uint64_t AuditLog::append(AuditRecord record) {
    std::lock_guard lock(mutex_);
    record.seq = records_.empty() ? 1 : records_.back().seq + 1;
    if (record.timestamp.empty()) record.timestamp = now_iso8601();
    if (out_.is_open()) {
        out_ << audit_record_to_json(record).dump() << '\n';
        out_.flush();
        if (!out_) throw StorageError("audit write failed");
    }
    records_.push_back(std::move(record));
    return records_.back().seq;
}

std::vector<AuditRecord> AuditLog::query(const AuditFilter& filter) const {
    std::lock_guard lock(mutex_);
    std::vector<AuditRecord> out;
    for (const auto& r : records_) {
        if (out.size() >= filter.limit) break;
        if (r.seq <= filter.after_seq) continue;
        if (filter.kind && r.kind != *filter.kind) continue;
        if (filter.app && r.subject != *filter.app) continue;
        if (filter.from_time && r.timestamp < *filter.from_time) continue;
        if (filter.to_time && r.timestamp >= *filter.to_time) continue;
        out.push_back(r);
    }
    return out;
}

std::vector<AuditRecord> AuditLog::all() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::uint64_t AuditLog::last_seq() const {
    std::lock_guard lock(mutex_);
    return records_.empty() ? 0 : records_.back().seq;
}

PermissionStore::PermissionStore(AuditLog& audit) : audit_(audit) {}

void PermissionStore::restore_from_audit() {
    std::vector<Permission> active;
    std::uint64_t version = 0;
    for (const auto& r : audit_.all()) {
        if (r.kind == AuditKind::PermCreated || r.kind == AuditKind::PermAutoDeployed) {
            active.push_back(permission_from_json(r.detail.at("permission")));
            ++version;
        } else if (r.kind == AuditKind::PermRemoved) {
            const auto id = r.detail.at("permission").at("id").get<std::string>();
            std::erase_if(active, [&](const Permission& p) { return p.id == id; });
            ++version;
        }
    }
    std::lock_guard lock(mutex_);
    current_ = make_snapshot(std::move(active), version);
}

AddResult PermissionStore::add_permission(const DifferenceEngine& engine, Permission p, Actor actor) {
    if (!engine.forest().has_action(p.action))
        throw ValidationError("action '" + p.action + "' is not declared by application '" + p.app + "'");
    p.rvs = resolve_rvs(p.rvs, engine.forest());

    std::lock_guard lock(mutex_);
    if (p.id.empty()) p.id = new_permission_id();
    if (p.created_at == 0) p.created_at = now_millis();

    AddResult result{p, detect_redundancy(engine, p, current_.restricted_to(p.app))};
    Json warning_ids = Json::array();
    for (const auto& w : result.warnings) warning_ids.push_back(w.id);

    const auto kind = p.origin == PermissionOrigin::AutoDeployed ? AuditKind::PermAutoDeployed : AuditKind::PermCreated;
    audit_.append(AuditRecord{0, {}, kind, p.app, Json{{"permission", permission_to_json(p)}, {"warnings", warning_ids}}, actor});

    auto next = *current_.permissions;
    next.push_back(p);
    current_ = make_snapshot(std::move(next), current_.snapshot_id + 1);
    return result;
}

Permission PermissionStore::remove_permission(const std::string& id, Actor actor) {
    std::lock_guard lock(mutex_);
    auto next = *current_.permissions;
    const auto it = std::find_if(next.begin(), next.end(), [&](const Permission& p) { return p.id == id; });
    if (it == next.end()) throw NotFound("no active permission with id '" + id + "'");
    const Permission removed = *it;
    audit_.append(AuditRecord{0, {}, AuditKind::PermRemoved, removed.app, Json{{"permission", permission_to_json(removed)}}, actor});
    next.erase(it);
    current_ = make_snapshot(std::move(next), current_.snapshot_id + 1);
    return removed;
}

ActiveSnapshot PermissionStore::capture_snapshot() const {
    std::lock_guard lock(mutex_);
    return current_;
}

std::optional<Permission> PermissionStore::find(const std::string& id) const {
    const auto snap = capture_snapshot();
    for (const auto& p : *snap.permissions)
        if (p.id == id) return p;
    return std::nullopt;
}

ReplayReport replay_audit(const std::vector<AuditRecord>& records, const EngineLookup& engines) {
    ReplayReport report;
    std::vector<Permission> active;
    std::uint64_t version = 0;
    // history[v] is the active set after v permission mutations.
    std::vector<std::shared_ptr<const std::vector<Permission>>> history{
        std::make_shared<const std::vector<Permission>>()};
    auto commit = [&] {
        ++version;
        history.push_back(std::make_shared<const std::vector<Permission>>(active));
    };
    auto diverge = [&](const AuditRecord& r, std::string reason, Json recorded = {}, Json replayed = {}) {
        report.divergences.push_back(ReplayDivergence{r.seq, std::move(reason), std::move(recorded), std::move(replayed)});
    };

    for (const auto& r : records) {
        ++report.records;
        try {
            switch (r.kind) {
                case AuditKind::PermCreated:
                case AuditKind::PermAutoDeployed:
                    active.push_back(permission_from_json(r.detail.at("permission")));
                    commit();
                    break;
                case AuditKind::PermRemoved: {
                    const auto id = r.detail.at("permission").at("id").get<std::string>();
                    if (std::erase_if(active, [&](const Permission& p) { return p.id == id; }) == 0)
                        diverge(r, "removal of a permission that is not active: " + id);
                    commit();
                    break;
                }
                case AuditKind::AccessAllowed:
                case AuditKind::AccessDenied: {
                    ++report.accesses_checked;
                    const auto* engine = engines(r.subject);
                    if (!engine) {
                        diverge(r, "unknown application '" + r.subject + "'");
                        break;
                    }
                    const auto& recorded = r.detail.at("check");
                    const auto needs = access_need_from_json(r.detail.at("needs"));
                    const auto at = recorded.at("snapshot_id").get<std::uint64_t>();
                    if (at > version) {
                        diverge(r, "snapshot " + std::to_string(at) + " is newer than the log at this point");
                        break;
                    }
                    const auto snapshot = ActiveSnapshot{history[at], at}.restricted_to(r.subject);
                    auto replayed = check_access(*engine, needs, snapshot);
                    if (recorded.contains("error")) {
                        replayed.error = recorded.at("error").get<std::string>();
                        replayed.decision = Decision::Denied;
                    }
                    const auto replayed_json = check_result_to_json(replayed);
                    const bool kind_ok = (r.kind == AuditKind::AccessAllowed) == replayed.granted();
                    if (!kind_ok || replayed_json != recorded)
                        diverge(r, "decision differs on replay", recorded, replayed_json);
                    break;
                }
                case AuditKind::ModeChanged: break;
            }
        } catch (const std::exception& e) {
            diverge(r, std::string("record could not be replayed: ") + e.what());
        }
    }
    report.active = std::move(active);
    report.snapshot_id = version;
    return report;
}

}  // namespace ac4a
