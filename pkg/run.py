# run.py
"""
Script principal de ejecución
"""
import sys
import os

# Añadir el directorio actual al path para imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

# Ahora importar con path absoluto
from app.cli import main as cli_main
from app.core.config import settings
from app.core.config_validator import validate_config


def main():
    """Valida la configuración y delega en la CLI del laboratorio"""
    print("🚀 Iniciando Soliton Rogue Lab...")

    if not validate_config():
        print("💡 Verifica tu archivo .env")
        print(f"💡 Archivo .env existe: {os.path.exists('.env')}")
        sys.exit(2)

    argv = sys.argv[1:] or ["serve"]
    if argv[0] == "serve":
        print(f"📖 Docs: http://{settings.API_HOST}:{settings.API_PORT}/docs")
        print(f"💾 Cache: {settings.cache_backend}")
        print("🛑 Presiona Ctrl+C para detener\n")

    try:
        code = cli_main(argv)
    except KeyboardInterrupt:
        print("\n👋 Soliton Rogue Lab detenido")
        code = 0
    sys.exit(code)


if __name__ == "__main__":
    main()
