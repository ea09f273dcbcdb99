//! Maps with structured keys serialize as sorted lists of `[key, value]`
//! pairs, since JSON object keys must be strings.

pub mod pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<K, V, S>(map: &BTreeMap<K, V>, serializer: S) -> Result<S::Ok, S::Error>
    where
        K: Serialize,
        V: Serialize,
        S: Serializer,
    {
        serializer.collect_seq(map.iter())
    }

    pub fn deserialize<'de, K, V, D>(deserializer: D) -> Result<BTreeMap<K, V>, D::Error>
    where
        K: Deserialize<'de> + Ord,
        V: Deserialize<'de>,
        D: Deserializer<'de>,
    {
        let entries = Vec::<(K, V)>::deserialize(deserializer)?;
        let len = entries.len();
        let map: BTreeMap<K, V> = entries.into_iter().collect();
        if map.len() != len {
            return Err(serde::de::Error::custom("duplicate key in pair list"));
        }
        Ok(map)
    }
}
