# test_api.py
"""
Script para probar la API REST del laboratorio
"""
import asyncio
import httpx


async def test_api():
    """Prueba la API REST"""

    base_url = "http://localhost:8000"

    async with httpx.AsyncClient(timeout=120) as client:
        # Test health check
        print("🏥 Probando health check...")
        response = await client.get(f"{base_url}/health")
        print(f"Status: {response.status_code}")
        print(f"Response: {response.json()}")

        # Pico del problema modelo PIII
        print("\n🧮 Probando /model (PIII en el origen)...")
        response = await client.post(f"{base_url}/model", json={"case": "PIII", "X": 0.0, "T": 0.0})
        print(f"Status: {response.status_code}")
        print(f"|Ψ(0,0)| = {response.json().get('abs_psi')} (esperado 4)")

        # Un solitón
        print("\n🌊 Probando /soliton (λ = i)...")
        payload = {"eigenvalues": [[0.0, 1.0]], "x_min": -2.0, "x_max": 2.0, "points": 5}
        response = await client.post(f"{base_url}/soliton", json=payload)
        print(f"Status: {response.status_code}")
        print(f"Response: {response.json()}")

        # Muestra aleatoria
        print("\n🎲 Probando /sample...")
        response = await client.post(f"{base_url}/sample", json={"case": "PIII", "n": 5, "seed": 1})
        print(f"Status: {response.status_code}")
        print(f"Response: {response.json()}")

        # Error esperado: PV sin ζ
        print("\n🚫 Probando /model con PV sin zeta (esperado 422)...")
        response = await client.post(f"{base_url}/model", json={"case": "PV"})
        print(f"Status: {response.status_code}")


if __name__ == "__main__":
    asyncio.run(test_api())
