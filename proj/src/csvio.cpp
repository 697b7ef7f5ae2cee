#include "pvtnet/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace pvtnet {

std::string format_double(double value) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) {
            return buf;
        }
    }
    return buf;
}

namespace {

bool needs_quoting(const std::string& field) {
    if (field.empty()) {
        return false;
    }
    if (field.front() == ' ' || field.back() == ' ') {
        return true;
    }
    return field.find_first_of(",\"\n\r") != std::string::npos;
}

void append_field(std::string& out, const std::string& field) {
    if (!needs_quoting(field)) {
        out += field;
        return;
    }
    out += '"';
    for (char c : field) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
}

void append_row(std::string& out, const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) {
            out += ',';
        }
        append_field(out, row[i]);
    }
    out += '\n';
}

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

std::string to_csv(const CsvDocument& doc) {
    std::string out;
    for (const auto& [key, value] : doc.metadata) {
        out += "# ";
        out += key;
        out += '=';
        out += value;
        out += '\n';
    }
    append_row(out, doc.header);
    for (const auto& row : doc.rows) {
        append_row(out, row);
    }
    return out;
}

CsvDocument parse_csv(const std::string& text) {
    CsvDocument doc;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        // Rows with quoted fields may span lines; scan to the true row end.
        std::size_t end = pos;
        bool quoted = false;
        while (end < text.size() && (quoted || text[end] != '\n')) {
            if (text[end] == '"') {
                quoted = !quoted;
            }
            ++end;
        }
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            const std::string meta = line.substr(2);
            const auto eq = meta.find('=');
            if (eq == std::string::npos) {
                throw std::runtime_error("parse_csv: malformed metadata line");
            }
            doc.metadata.emplace_back(meta.substr(0, eq), meta.substr(eq + 1));
            continue;
        }
        if (!header_seen) {
            doc.header = split_row(line);
            header_seen = true;
        } else {
            auto row = split_row(line);
            if (row.size() != doc.header.size()) {
                throw std::runtime_error("parse_csv: ragged row");
            }
            doc.rows.push_back(std::move(row));
        }
    }
    if (!header_seen) {
        throw std::runtime_error("parse_csv: missing header row");
    }
    return doc;
}

}  // namespace pvtnet
