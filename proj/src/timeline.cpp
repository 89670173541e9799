#include "triage/timeline.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "triage/csv.hpp"
#include "triage/strings.hpp"

namespace triage {

bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month < 1 || month > 12) return 0;
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[static_cast<std::size_t>(month - 1)];
}

bool is_valid_date(const Date& d) {
    return d.year >= 1 && d.year <= 9999 && d.month >= 1 && d.month <= 12 && d.day >= 1 &&
           d.day <= days_in_month(d.year, d.month);
}

bool is_valid_time(const TimeOfDay& t) {
    return t.hour >= 0 && t.hour < 24 && t.minute >= 0 && t.minute < 60 && t.second >= 0 &&
           t.second < 60;
}

std::int64_t days_from_civil(const Date& d) {
    std::int64_t y = d.year;
    y -= d.month <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (d.month + (d.month > 2 ? -3 : 9)) + 2) / 5 + d.day - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

Date civil_from_days(std::int64_t z) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t day = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t month = mp + (mp < 10 ? 3 : -9);
    return Date{static_cast<int>(y + (month <= 2)), static_cast<int>(month), static_cast<int>(day)};
}

int weekday_monday0(const Date& d) {
    std::int64_t days = days_from_civil(d);
    return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

std::string format_date(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d/%02d/%04d", d.month, d.day, d.year);
    return buf;
}

std::string format_time(const TimeOfDay& t) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", t.hour, t.minute, t.second);
    return buf;
}

std::string format_iso_datetime(const Date& d, const TimeOfDay& t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", d.year, d.month, d.day,
                  t.hour, t.minute, t.second);
    return buf;
}

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

std::optional<int> to_int(std::string_view s) {
    if (!all_digits(s) || s.size() > 4) return std::nullopt;
    int v = 0;
    for (char c : s) v = v * 10 + (c - '0');
    return v;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text, bool lenient) {
    char sep = 0;
    if (text.find('/') != std::string_view::npos) {
        sep = '/';
    } else if (text.find('-') != std::string_view::npos) {
        if (!lenient) return std::nullopt;
        sep = '-';
    } else {
        return std::nullopt;
    }

    auto parts = split(text, sep);
    if (parts.size() != 3) return std::nullopt;

    Date d;
    if (sep == '/') {
        // MM/DD/YYYY
        if (!lenient && (parts[0].size() != 2 || parts[1].size() != 2 || parts[2].size() != 4)) {
            return std::nullopt;
        }
        auto m = to_int(parts[0]);
        auto dd = to_int(parts[1]);
        auto y = to_int(parts[2]);
        if (!m || !dd || !y || parts[2].size() != 4) return std::nullopt;
        d = Date{*y, *m, *dd};
    } else {
        // YYYY-MM-DD
        auto y = to_int(parts[0]);
        auto m = to_int(parts[1]);
        auto dd = to_int(parts[2]);
        if (!y || !m || !dd || parts[0].size() != 4) return std::nullopt;
        d = Date{*y, *m, *dd};
    }
    if (!is_valid_date(d)) return std::nullopt;
    return d;
}

std::optional<TimeOfDay> parse_time(std::string_view text, bool lenient) {
    auto parts = split(text, ':');
    if (parts.size() != 3) return std::nullopt;
    if (!lenient && (parts[0].size() != 2 || parts[1].size() != 2 || parts[2].size() != 2)) {
        return std::nullopt;
    }
    auto h = to_int(parts[0]);
    auto m = to_int(parts[1]);
    auto s = to_int(parts[2]);
    if (!h || !m || !s) return std::nullopt;
    TimeOfDay t{*h, *m, *s};
    if (!is_valid_time(t)) return std::nullopt;
    return t;
}

std::string MacbFlags::to_string() const {
    std::string s(4, '.');
    if (modified) s[0] = 'M';
    if (accessed) s[1] = 'A';
    if (changed) s[2] = 'C';
    if (born) s[3] = 'B';
    return s;
}

std::optional<MacbFlags> MacbFlags::parse(std::string_view text) {
    if (text.size() != 4) return std::nullopt;
    MacbFlags f;
    if (text[0] == 'M') f.modified = true;
    else if (text[0] != '.') return std::nullopt;
    if (text[1] == 'A') f.accessed = true;
    else if (text[1] != '.') return std::nullopt;
    if (text[2] == 'C') f.changed = true;
    else if (text[2] != '.') return std::nullopt;
    if (text[3] == 'B') f.born = true;
    else if (text[3] != '.') return std::nullopt;
    return f;
}

Timeline::Timeline(std::vector<TimelineEvent> events, std::string source_label)
    : events_(std::move(events)), source_label_(std::move(source_label)) {}

const TimelineEvent* Timeline::find_row(std::uint64_t row_id) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), row_id,
                               [](const TimelineEvent& e, std::uint64_t id) { return e.row_id < id; });
    if (it == events_.end() || it->row_id != row_id) return nullptr;
    return &*it;
}

namespace {

const std::vector<std::string>& header_fields() {
    static const std::vector<std::string> fields = split(kL2tcsvHeader, ',');
    return fields;
}

// Returns an error reason, or empty string on success.
std::string fill_event(std::vector<std::string>& cols, std::uint64_t row_id, bool lenient,
                       TimelineEvent& ev) {
    if (cols.size() != static_cast<std::size_t>(kL2tcsvColumns)) {
        return "wrong column count: " + std::to_string(cols.size());
    }
    auto date = parse_date(cols[0], lenient);
    if (!date) return "unparseable date: '" + cols[0] + "'";
    auto time = parse_time(cols[1], lenient);
    if (!time) return "unparseable time: '" + cols[1] + "'";
    auto macb = MacbFlags::parse(cols[3]);
    if (!macb) return "bad MACB pattern: '" + cols[3] + "'";

    ev.row_id = row_id;
    ev.date = *date;
    ev.time = *time;
    ev.timezone = std::move(cols[2]);
    ev.macb = *macb;
    ev.source = std::move(cols[4]);
    ev.sourcetype = std::move(cols[5]);
    ev.event_type = std::move(cols[6]);
    ev.user = std::move(cols[7]);
    ev.host = std::move(cols[8]);
    ev.short_desc = std::move(cols[9]);
    ev.desc = std::move(cols[10]);
    ev.version = std::move(cols[11]);
    ev.filename = std::move(cols[12]);
    ev.inode = std::move(cols[13]);
    ev.notes = std::move(cols[14]);
    ev.format = std::move(cols[15]);
    ev.extra = std::move(cols[16]);
    return {};
}

}  // namespace

ParseResult parse_timeline(std::string_view buffer, ParsePolicy policy, std::string source_label) {
    CsvReader reader(buffer);
    std::vector<std::string> cols;

    if (!reader.next_record(cols)) {
        throw MissingHeader("empty input");
    }
    if (cols != header_fields()) {
        std::string joined;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) joined.push_back(',');
            joined.append(cols[i]);
        }
        throw MissingHeader("expected l2tcsv column names, got: " + joined);
    }

    ParseResult result;
    std::vector<TimelineEvent> events;
    const bool lenient = policy == ParsePolicy::lenient;
    std::uint64_t row_id = 0;
    while (reader.next_record(cols)) {
        // A sole empty field comes from a trailing blank line; ignore it.
        if (cols.size() == 1 && cols[0].empty()) continue;
        TimelineEvent ev;
        std::string reason = fill_event(cols, row_id, lenient, ev);
        if (reason.empty()) {
            events.push_back(std::move(ev));
        } else if (lenient) {
            result.skipped.push_back(SkippedRow{row_id, std::move(reason)});
        } else {
            throw MalformedRow(row_id, reason);
        }
        ++row_id;
    }
    result.data_rows = row_id;
    result.timeline = Timeline(std::move(events), std::move(source_label));
    return result;
}

ParseResult parse_timeline(std::istream& input, ParsePolicy policy, std::string source_label) {
    std::ostringstream ss;
    ss << input.rdbuf();
    std::string buffer = std::move(ss).str();
    return parse_timeline(std::string_view(buffer), policy, std::move(source_label));
}

ParseResult parse_timeline_file(const std::filesystem::path& path, ParsePolicy policy) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open timeline file: " + path.string(), 2);
    std::string buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_timeline(std::string_view(buffer), policy, path.filename().string());
}

namespace {

void append_event_row(std::string& out, const TimelineEvent& ev) {
    static thread_local std::vector<std::string> cols;
    cols.assign(static_cast<std::size_t>(kL2tcsvColumns), std::string());
    cols[0] = format_date(ev.date);
    cols[1] = format_time(ev.time);
    cols[2] = ev.timezone;
    cols[3] = ev.macb.to_string();
    cols[4] = ev.source;
    cols[5] = ev.sourcetype;
    cols[6] = ev.event_type;
    cols[7] = ev.user;
    cols[8] = ev.host;
    cols[9] = ev.short_desc;
    cols[10] = ev.desc;
    cols[11] = ev.version;
    cols[12] = ev.filename;
    cols[13] = ev.inode;
    cols[14] = ev.notes;
    cols[15] = ev.format;
    cols[16] = ev.extra;
    write_csv_record(out, cols);
}

}  // namespace

void write_timeline(const Timeline& timeline, std::ostream& output) {
    std::string chunk;
    chunk.reserve(1 << 20);
    chunk.append(kL2tcsvHeader);
    chunk.push_back('\n');
    for (const auto& ev : timeline.events()) {
        append_event_row(chunk, ev);
        if (chunk.size() > (1 << 20) - 4096) {
            output.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
            chunk.clear();
        }
    }
    if (!chunk.empty()) {
        output.write(chunk.data(), static_cast<std::streamsize>(chunk.size()));
    }
    if (!output) throw Error("timeline write failed", 2);
}

std::string write_timeline_string(const Timeline& timeline) {
    std::ostringstream ss;
    write_timeline(timeline, ss);
    return std::move(ss).str();
}

TimelineSummary summarize(const Timeline& timeline) {
    TimelineSummary s;
    s.event_count = timeline.size();
    std::unordered_set<std::string_view> filenames;
    filenames.reserve(timeline.size());
    for (const auto& ev : timeline.events()) {
        filenames.insert(ev.filename);
        ++s.counts_by_event_type[ev.event_type];
        ++s.counts_by_source[ev.source];
        ++s.counts_by_sourcetype[ev.sourcetype];
    }
    s.distinct_filename_count = filenames.size();
    return s;
}

TimelineField field_from_name(std::string_view name) {
    static const std::unordered_map<std::string_view, TimelineField> map = {
        {"date", TimelineField::date},       {"time", TimelineField::time},
        {"timezone", TimelineField::timezone}, {"MACB", TimelineField::macb},
        {"source", TimelineField::source},   {"sourcetype", TimelineField::sourcetype},
        {"type", TimelineField::type},       {"user", TimelineField::user},
        {"host", TimelineField::host},       {"short", TimelineField::short_desc},
        {"desc", TimelineField::desc},       {"version", TimelineField::version},
        {"filename", TimelineField::filename}, {"inode", TimelineField::inode},
        {"notes", TimelineField::notes},     {"format", TimelineField::format},
        {"extra", TimelineField::extra},
    };
    auto it = map.find(name);
    if (it == map.end()) throw UnknownField(std::string(name));
    return it->second;
}

namespace {

std::string field_value(const TimelineEvent& ev, TimelineField f) {
    switch (f) {
        case TimelineField::date: return format_date(ev.date);
        case TimelineField::time: return format_time(ev.time);
        case TimelineField::timezone: return ev.timezone;
        case TimelineField::macb: return ev.macb.to_string();
        case TimelineField::source: return ev.source;
        case TimelineField::sourcetype: return ev.sourcetype;
        case TimelineField::type: return ev.event_type;
        case TimelineField::user: return ev.user;
        case TimelineField::host: return ev.host;
        case TimelineField::short_desc: return ev.short_desc;
        case TimelineField::desc: return ev.desc;
        case TimelineField::version: return ev.version;
        case TimelineField::filename: return ev.filename;
        case TimelineField::inode: return ev.inode;
        case TimelineField::notes: return ev.notes;
        case TimelineField::format: return ev.format;
        case TimelineField::extra: return ev.extra;
    }
    return {};
}

}  // namespace

std::vector<std::pair<std::string, std::uint64_t>> value_counts(const Timeline& timeline,
                                                                TimelineField field) {
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const auto& ev : timeline.events()) {
        ++counts[field_value(ev, field)];
    }
    std::vector<std::pair<std::string, std::uint64_t>> out(counts.begin(), counts.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

std::vector<std::pair<std::string, std::uint64_t>> value_counts(const Timeline& timeline,
                                                                std::string_view field_name) {
    return value_counts(timeline, field_from_name(field_name));
}

}  // namespace triage
