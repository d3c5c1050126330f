#include "dse/csv.hpp"

#include "dse/errors.hpp"

namespace dse {
namespace {

std::vector<std::string> split_line(std::string_view line)
{
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
        auto comma = line.find(',', start);
        cells.emplace_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

}  // namespace

int CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable table;
    bool first = true;
    std::size_t line_no = 0;
    while (!text.empty()) {
        auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        auto cells = split_line(line);
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != table.header.size())
                throw ParseError("CSV line " + std::to_string(line_no) + " has " + std::to_string(cells.size())
                                 + " cells, header has " + std::to_string(table.header.size()));
            table.rows.push_back(std::move(cells));
        }
    }
    if (first)
        throw ParseError("CSV document has no header");
    return table;
}

std::string write_csv(const CsvTable& table)
{
    std::string out;
    auto append = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    append(table.header);
    for (const auto& row : table.rows)
        append(row);
    return out;
}

}  // namespace dse
