#include "celds/stores.hpp"

#include <ostream>

#include "json.hpp"

namespace celds {

std::string_view to_string(StoreKind k)
{
    switch (k) {
    case StoreKind::DATA: return "data";
    case StoreKind::EVENT: return "event";
    case StoreKind::META: return "meta";
    }
    return "?";
}

void Stores::append(StoreRecord record)
{
    switch (record.store) {
    case StoreKind::DATA: data_.push_back(std::move(record)); break;
    case StoreKind::EVENT: events_.push_back(std::move(record)); break;
    case StoreKind::META: meta_.push_back(std::move(record)); break;
    }
}

void Stores::append(const std::vector<StoreRecord>& records)
{
    for (const auto& r : records)
        append(r);
}

std::vector<StoreRecord> Stores::query(StoreKind store, const std::string& node, std::int64_t from,
                                       std::int64_t to) const
{
    const auto& rows = store == StoreKind::DATA ? data_ : store == StoreKind::EVENT ? events_ : meta_;
    std::vector<StoreRecord> out;
    for (const auto& r : rows)
        if (r.node == node && r.step >= from && r.step <= to)
            out.push_back(r);
    return out;
}

std::vector<NodeMetrics> Stores::metric_history(NodeId node) const
{
    std::vector<NodeMetrics> out;
    const std::string name = node.name();
    for (const auto& r : data_)
        if (r.node == name && r.metrics)
            out.push_back(*r.metrics);
    return out;
}

void Stores::write(std::ostream& out) const
{
    for (const auto* rows : {&data_, &events_, &meta_}) {
        for (const auto& r : *rows) {
            nlohmann::ordered_json j;
            j["store"] = std::string(to_string(r.store));
            j["step"] = r.step;
            j["kind"] = r.kind;
            if (!r.node.empty())
                j["node"] = r.node;
            if (!r.subject.empty())
                j["subject"] = r.subject;
            if (!r.detail.empty())
                j["detail"] = r.detail;
            if (r.diagnosis)
                j["diagnosis"] = std::string(to_string(*r.diagnosis));
            if (r.metrics) {
                j["metrics"] = {{"latency", r.metrics->latency},
                                {"cpu_usage", r.metrics->cpu_usage},
                                {"storage_usage", r.metrics->storage_usage},
                                {"memory_usage", r.metrics->memory_usage},
                                {"bandwidth", r.metrics->bandwidth}};
            }
            out << j.dump() << '\n';
        }
    }
}

} // namespace celds
