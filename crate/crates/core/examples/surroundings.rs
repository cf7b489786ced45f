// SPDX-License-Identifier: Apache-2.0

//! Place a design on a map: project coordinates, measure distances and
//! push a mesh through OBJ in renderer coordinates.

use adflow::geo::{from_web_mercator, haversine_distance, map_to_local, to_web_mercator, BBox, LatLon};
use adflow::geometry::{box_mesh, from_render_coords, parse_obj, export_obj, signed_volume, to_render_coords};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let site = LatLon::new(48.1486, 17.1077);
    let xy = to_web_mercator(site)?;
    let back = from_web_mercator(xy);
    println!("site -> ({:.3}, {:.3}) m -> ({:.9}, {:.9})", xy.x, xy.y, back.lat, back.lon);

    let station = LatLon::new(48.1589, 17.1062);
    println!("site to station: {:.1} m", haversine_distance(site, station));

    let bbox = BBox {
        sw: LatLon::new(48.14, 17.10),
        ne: LatLon::new(48.16, 17.12),
    };
    let local = map_to_local(bbox, site)?;
    println!("local: u={:.4} v={:.4}, {:.1} m east, {:.1} m north", local.u, local.v, local.east, local.north);

    let building = box_mesh([0.0, 0.0, 5.0], 10.0)?;
    let text = export_obj(&[to_render_coords(&building)]);
    let parsed = parse_obj(&text)?;
    let restored = from_render_coords(&parsed.meshes[0]);
    println!(
        "box via OBJ: {} vertices, volume {:.3} (was {:.3})",
        restored.vertices.len(),
        signed_volume(&restored),
        signed_volume(&building)
    );
    Ok(())
}
