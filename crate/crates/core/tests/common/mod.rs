#![allow(dead_code)]

use snz_core::config::DeviceConfig;

pub fn device() -> DeviceConfig {
    DeviceConfig::load(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/device_table_s1.json")).unwrap()
}
