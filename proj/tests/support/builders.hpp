#pragma once

// Small constructors for hand-built timelines and random training data used
// across the test suites.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "triage/features.hpp"
#include "triage/rng.hpp"
#include "triage/timeline.hpp"

namespace test_support {

struct EventSpec {
    std::string date = "01/06/2020";
    std::string time = "10:30:00";
    std::string macb = "....";
    std::string source = "FILE";
    std::string sourcetype = "NTFS $MFT";
    std::string type = "Last Access Time";
    std::string desc;
    std::string filename = "-";
};

inline std::string event_row(const EventSpec& e) {
    // date,time,timezone,MACB,source,sourcetype,type,user,host,short,desc,
    // version,filename,inode,notes,format,extra
    std::string row;
    auto add = [&](const std::string& f) {
        if (!row.empty()) row += ',';
        bool quote = f.find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
            row += f;
            return;
        }
        row += '"';
        for (char c : f) {
            if (c == '"') row += '"';
            row += c;
        }
        row += '"';
    };
    add(e.date);
    add(e.time);
    add("UTC");
    add(e.macb);
    add(e.source);
    add(e.sourcetype);
    add(e.type);
    add("user");
    add("host1");
    add(e.type);
    add(e.desc);
    add("2");
    add(e.filename);
    add("12345");
    add("-");
    add("test");
    add("-");
    return row;
}

inline std::string timeline_text(const std::vector<EventSpec>& events) {
    std::string text(triage::kL2tcsvHeader);
    text += '\n';
    for (const auto& e : events) {
        text += event_row(e);
        text += '\n';
    }
    return text;
}

inline triage::Timeline make_timeline(const std::vector<EventSpec>& events) {
    return triage::parse_timeline(timeline_text(events), triage::ParsePolicy::strict).timeline;
}

// Random dense dataset with both classes present. Values ~ N(0,1); labels
// split evenly by index parity so neither class can be empty.
inline std::pair<std::vector<triage::FeatureVector>, std::vector<int>> random_dataset(
    std::size_t rows, std::size_t cols, std::uint64_t seed) {
    triage::SeededRng rng(seed);
    std::vector<triage::FeatureVector> matrix(rows);
    std::vector<int> labels(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        matrix[i].artefact.canonical_path = "/x/row" + std::to_string(i);
        matrix[i].values.resize(cols);
        for (std::size_t k = 0; k < cols; ++k) matrix[i].values[k] = rng.gaussian();
        labels[i] = (i % 2 == 0) ? 1 : -1;
    }
    return {std::move(matrix), std::move(labels)};
}

// A schema of plain numbered count features, for tests that need alignment
// with hand-built matrices.
inline triage::FeatureSchema numbered_schema(std::size_t cols) {
    triage::FeatureSchema schema;
    for (std::size_t k = 0; k < cols; ++k) {
        triage::FeatureDef def;
        def.name = "count_type:synthetic_" + std::to_string(k);
        def.kind = triage::FeatureKind::event_count;
        def.parameter = "type:synthetic_" + std::to_string(k);
        schema.defs.push_back(std::move(def));
    }
    return schema;
}

}  // namespace test_support
