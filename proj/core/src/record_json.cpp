#include "abgp/errors.hpp"
#include "abgp/records.hpp"

#include <json.hpp>

namespace abgp::records {

namespace {

using nlohmann::json;

bool get_u64(const json& obj, const char* field, std::uint64_t& out) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number_unsigned()) return false;
    out = it->get<std::uint64_t>();
    return true;
}

bool get_i64_nonneg(const json& obj, const char* field, std::int64_t& out) {
    auto it = obj.find(field);
    if (it == obj.end() || !it->is_number_integer()) return false;
    const auto v = it->get<std::int64_t>();
    if (v < 0) return false;
    out = v;
    return true;
}

}  // namespace

std::string record_to_json(const RecordModel& record, const ClusterSpec& cluster,
                           bool include_state_hash) {
    json sigs = json::object();
    for (const auto& [pk, sig] : record.signatures) {
        sigs[pk.to_hex()] = sig.to_hex();
    }
    json obj{
        {"hash", digest_to_hex(record.hash)},
        {"key", record.key},
        {"value", record.value},
        {"version", record.version},
        {"signatureType", signature_type_name(record.signature_type)},
        {"signatures", std::move(sigs)},
        {"publicKeysBitmap", bitmap_encode(cluster, record.public_keys)},
        {"timestamp", record.timestamp},
        {"timestampIndex", record.timestamp_index},
        {"createdAt", record.created_at},
    };
    if (include_state_hash && record.state_hash) {
        obj["stateHash"] = record.state_hash->to_hex();
    }
    return obj.dump();
}

RecordParse record_from_json(std::string_view json_text, const ClusterSpec& cluster,
                             bool accept_state_hash) {
    json obj = json::parse(json_text, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) return {std::nullopt, "not a JSON object"};

    RecordModel rec;

    auto hash_it = obj.find("hash");
    if (hash_it == obj.end() || !hash_it->is_string()) return {std::nullopt, "missing hash"};
    if (auto digest = digest_from_hex(hash_it->get_ref<const std::string&>())) {
        rec.hash = *digest;
    } else {
        return {std::nullopt, "hash is not 64 hex chars"};
    }

    auto key_it = obj.find("key");
    auto value_it = obj.find("value");
    if (key_it == obj.end() || !key_it->is_string()) return {std::nullopt, "missing key"};
    if (value_it == obj.end() || !value_it->is_string()) return {std::nullopt, "missing value"};
    rec.key = key_it->get<std::string>();
    rec.value = value_it->get<std::string>();

    if (!get_u64(obj, "version", rec.version)) return {std::nullopt, "missing version"};

    auto type_it = obj.find("signatureType");
    if (type_it == obj.end() || !type_it->is_string()) return {std::nullopt, "missing signatureType"};
    const auto& type_name = type_it->get_ref<const std::string&>();
    if (type_name == "INTERMEDIATE") {
        rec.signature_type = SignatureType::Intermediate;
    } else if (type_name == "MULTISIG") {
        rec.signature_type = SignatureType::Multisig;
    } else {
        return {std::nullopt, "unknown signatureType"};
    }

    auto sigs_it = obj.find("signatures");
    if (sigs_it == obj.end() || !sigs_it->is_object()) return {std::nullopt, "missing signatures"};
    for (const auto& [pk_hex, sig_value] : sigs_it->items()) {
        if (!sig_value.is_string()) return {std::nullopt, "signature value is not a string"};
        auto pk = crypto::CurvePoint::from_hex(pk_hex);
        if (!pk) return {std::nullopt, "signer key is not a valid curve point"};
        auto sig = crypto::Scalar::from_hex(sig_value.get_ref<const std::string&>());
        if (!sig) return {std::nullopt, "signature is not a valid scalar"};
        rec.signatures.emplace(std::move(*pk), *sig);
    }

    std::uint64_t bitmap = 0;
    if (!get_u64(obj, "publicKeysBitmap", bitmap)) return {std::nullopt, "missing publicKeysBitmap"};
    try {
        rec.public_keys = bitmap_decode(cluster, bitmap);
    } catch (const Error&) {
        return {std::nullopt, "publicKeysBitmap out of range"};
    }

    if (!get_i64_nonneg(obj, "timestamp", rec.timestamp)) return {std::nullopt, "missing timestamp"};
    if (!get_u64(obj, "timestampIndex", rec.timestamp_index))
        return {std::nullopt, "missing timestampIndex"};
    if (!get_i64_nonneg(obj, "createdAt", rec.created_at)) return {std::nullopt, "missing createdAt"};

    if (accept_state_hash) {
        auto sh_it = obj.find("stateHash");
        if (sh_it != obj.end()) {
            if (!sh_it->is_string()) return {std::nullopt, "stateHash is not a string"};
            auto sh = crypto::Scalar::from_hex(sh_it->get_ref<const std::string&>());
            if (!sh) return {std::nullopt, "stateHash is not a valid scalar"};
            rec.state_hash = *sh;
        }
    }

    return {std::move(rec), ""};
}

}  // namespace abgp::records
